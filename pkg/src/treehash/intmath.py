"""Exact integer versions of the ceilings of logarithms and square roots.

Floating point gets ``ceil(log(x, b))`` wrong right at powers of the base
(``log(125, 5)`` is ``3.0000000000000004`` on most platforms), which is
exactly where the running-time formulas change value.
"""

from math import isqrt


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def ceil_log(num: int, base: int, den: int = 1) -> int:
    """Smallest integer ``k`` with ``base**k >= num / den``.

    ``k`` can be negative when ``num / den < 1``.
    """
    if num <= 0 or den <= 0:
        raise ValueError("ceil_log needs a positive argument")
    if base < 2:
        raise ValueError("ceil_log needs base >= 2")
    k = 0
    if num <= den:
        # walk down while base**(k-1) is still >= num/den
        while num * base ** (-(k - 1)) <= den:
            k -= 1
        return k
    power = 1
    while power * den < num:
        power *= base
        k += 1
    return k


def ceil_sqrt(n: int) -> int:
    if n < 0:
        raise ValueError("ceil_sqrt of a negative number")
    r = isqrt(n)
    return r if r * r == n else r + 1


def ceil_half_root(disc: int) -> int:
    """``ceil((-1 + sqrt(disc)) / 2)``, computed exactly.

    This is the smallest integer ``k`` with ``2k + 1 >= sqrt(disc)``; since
    ``2k + 1`` is an integer that is the same as ``2k + 1 >= ceil_sqrt(disc)``.
    """
    c = ceil_sqrt(disc)
    return ceil_div(c - 1, 2)
