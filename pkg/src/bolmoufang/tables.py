"""Published Cayley tables, verbatim."""

from .magma import Magma, parse_table

Q1 = parse_table("""\
6
0 1 2 3 4 5
1 5 0 4 2 3
2 4 5 0 3 1
3 0 4 5 1 2
4 2 3 1 5 0
5 3 1 2 0 4
""")

Q2 = parse_table("""\
6
0 1 2 3 4 5
1 5 0 4 2 3
2 4 5 0 3 1
3 0 4 5 1 2
4 3 1 2 5 0
5 2 3 1 0 4
""")

# satisfies M3 and M4, has inverses, not a loop
M3M4 = parse_table("""\
3
0 1 2
1 0 1
2 1 0
""")

# right neutral 0, two-sided inverses, satisfies LB, not a loop
RIGHT_NEUTRAL_LB = parse_table("""\
3
0 2 1
1 0 2
2 1 0
""")

# xy = x on {a, b}
LEFT_ZERO = parse_table("""\
2
0 0
1 1
""")

TRIVIAL = Magma(((0,),))

ALL = {
    "Q1": Q1,
    "Q2": Q2,
    "M3M4": M3M4,
    "RIGHT_NEUTRAL_LB": RIGHT_NEUTRAL_LB,
    "LEFT_ZERO": LEFT_ZERO,
    "TRIVIAL": TRIVIAL,
}
