"""Hypothesis strategies on top of the seeded generators."""

import random

from hypothesis import strategies as st

from relvc import assertions as A
from relvc import testing as T
from relvc.syntax import MemState

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)

coms = seeds.map(lambda s: T.gen_com(random.Random(s), 4, procs=("p",)))
aexps = seeds.map(lambda s: T.gen_aexp(random.Random(s), 3))
bexps = seeds.map(lambda s: T.gen_bexp(random.Random(s), 3))
pre_assertions = seeds.map(lambda s: T.gen_assertion(random.Random(s), (A.CUR,), 3))
post_assertions = seeds.map(lambda s: T.gen_assertion(random.Random(s), (A.CUR, A.OLD), 3))

addresses = st.integers(min_value=0, max_value=12)
values = st.integers(min_value=0, max_value=50)
states = st.dictionaries(addresses, values, max_size=8).map(MemState)
small_states = st.dictionaries(st.integers(0, 5), st.integers(0, 4), max_size=6).map(MemState)
