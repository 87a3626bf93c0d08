import itertools
from fractions import Fraction


def brute_level(d, n):
    """Points of Z^d with L1 norm n: choose the first d-1 coordinates freely, solve for the last."""
    out = []
    for head in itertools.product(range(-n, n + 1), repeat=d - 1):
        rest = n - sum(map(abs, head))
        if rest >= 0:
            out += [head + (s * rest,) for s in ({1, -1} if rest else {1})]
    return out


def polya_up_fraction(d, n):
    """Share of nearest-neighbour moves out of the level set that raise the norm.

    Counting measure is invariant for the simple random walk on Z^d, so this is
    the long-run up-probability at level n.
    """
    ups = total = 0
    for p in brute_level(d, n):
        for i in range(d):
            for s in (1, -1):
                q = list(p)
                q[i] += s
                total += 1
                ups += sum(map(abs, q)) > n
    return Fraction(ups, total)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
