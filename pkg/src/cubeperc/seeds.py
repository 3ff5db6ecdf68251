"""Per-trial seed derivation (SplitMix64 finalizer over root + golden-ratio stride)."""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(root: int, index: int) -> int:
    """Seed of trial ``index`` under ``root``; index i uses the (i+1)-th SplitMix64 output."""
    if index < 0:
        raise ValueError("trial index must be >= 0")
    return mix64(root + GOLDEN * (index + 1))
