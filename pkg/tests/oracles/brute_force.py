"""Independent oracles: plain-Python enumeration, no imports from dateiv.

Run directly to print the frozen values used by the fixture tests.
"""
from fractions import Fraction
from itertools import product

# (tau0, tau1, kappa0, kappa1) as exact fractions
TWO_MIXED = {
    "1": (Fraction(2, 10), Fraction(8, 10), Fraction(1, 10), Fraction(7, 10)),
    "2": (Fraction(5, 10), Fraction(5, 10), Fraction(3, 10), Fraction(9, 10)),
}


def joint_table(people, p_assign=Fraction(1, 2)):
    """Every cell (assign, indiv, take, cure) -> exact probability."""
    n = len(people)
    table = {}
    for a, i, t, c in product((0, 1), people, (0, 1), (0, 1)):
        tau0, tau1, k0, k1 = people[i]
        pa = p_assign if a == 1 else 1 - p_assign
        tau = tau1 if a == 1 else tau0
        pt = tau if t == 1 else 1 - tau
        kap = k1 if t == 1 else k0
        pc = kap if c == 1 else 1 - kap
        table[(a, i, t, c)] = pa * Fraction(1, n) * pt * pc
    return table


def prob(table, **fixed):
    keys = ("assign", "indiv", "take", "cure")
    total = Fraction(0)
    for cell, p in table.items():
        if all(cell[keys.index(k)] == v for k, v in fixed.items()):
            total += p
    return total


def conditionals(people, p_assign=Fraction(1, 2)):
    tab = joint_table(people, p_assign)
    out = []
    for var, a in (("cure", 1), ("cure", 0), ("take", 1), ("take", 0)):
        out.append(prob(tab, **{var: 1, "assign": a}) / prob(tab, assign=a))
    return tuple(out)


def wald(people, p_assign=Fraction(1, 2)):
    c1, c0, t1, t0 = conditionals(people, p_assign)
    return (c1 - c0) / (t1 - t0)


def date_by_hand(people):
    com = [(t1 - t0, k1 - k0) for t0, t1, k0, k1 in people.values() if t1 > t0]
    total = sum(dc for dc, _ in com)
    return sum(dc / total * ite for dc, ite in com)


def grid_search_defier(grid=(0, Fraction(1, 2), 1), min_gap=Fraction(1, 100)):
    """Smallest-first search over two-person populations with one defier.

    Returns the first population (complier "1", defier "2") whose DATE and
    Wald ratio are both defined and differ by more than min_gap.
    """
    for t0a, t1a, k0a, k1a, t0b, t1b, k0b, k1b in product(grid, repeat=8):
        if not (t1a > t0a and t1b < t0b):
            continue
        people = {"1": (t0a, t1a, k0a, k1a), "2": (t0b, t1b, k0b, k1b)}
        c1, c0, tk1, tk0 = conditionals(people)
        if tk1 == tk0:
            continue
        gap = abs(date_by_hand(people) - (c1 - c0) / (tk1 - tk0))
        if gap > min_gap:
            return people, gap
    return None


if __name__ == "__main__":
    tab = joint_table(TWO_MIXED)
    print("cells", len(tab), "sum", sum(tab.values()))
    print("P(A=1,I=1,T=1,C=1)", tab[(1, "1", 1, 1)])
    print("P(T=1,A=1)", prob(tab, take=1, assign=1))
    print("conditionals", [str(x) for x in conditionals(TWO_MIXED)])
    print("wald", wald(TWO_MIXED), "date", date_by_hand(TWO_MIXED))
    hit = grid_search_defier()
    print("defier hit", hit)
    if hit:
        print("date", date_by_hand(hit[0]), "wald", wald(hit[0]))
