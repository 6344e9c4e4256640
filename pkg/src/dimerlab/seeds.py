"""Deterministic seed streams.

A master seed is expanded into one seed per (temperature index, repetition
index) with the splitmix64 finaliser, so any single run of a sweep can be
reproduced without replaying the others:

    seed(t, r) = mix(mix(mix(master) ^ t) ^ r)

where ``mix`` adds the golden-ratio increment and applies the splitmix64
output function, all modulo 2**64.
"""

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    z = (x + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(master: int, t_index: int, repetition: int) -> int:
    if master < 0 or t_index < 0 or repetition < 0:
        raise ValueError("seed components must be non-negative integers")
    s = splitmix64(int(master) & _MASK)
    s = splitmix64(s ^ int(t_index))
    return splitmix64(s ^ int(repetition))
