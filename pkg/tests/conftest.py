import os

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from qgeodesic.ncalg import AlgebraSpec

settings.register_profile(
    "default",
    deadline=None,
    max_examples=int(os.environ.get("QG_EXAMPLES", "25")),
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")


def factor_strategy(alg: AlgebraSpec):
    """Single generators, scalar symbols and (nonrel) generic potential atoms."""
    idx = list(alg.indices)
    opts = [st.sampled_from(idx).map(alg.x), st.sampled_from(idx).map(alg.p),
            st.sampled_from(["m", "hbar", "q"]).map(alg.sym)]
    if not alg.relativistic:
        opts.append(st.lists(st.sampled_from(idx), max_size=2).map(lambda ix: alg.V(*ix)))
    else:
        opts.append(st.tuples(st.sampled_from(idx), st.lists(st.sampled_from(idx), max_size=1))
                    .map(lambda t: alg.A(t[0], *t[1])))
    return st.one_of(*opts)


def element_strategy(alg: AlgebraSpec, max_terms: int = 3, max_len: int = 3):
    coeff = st.tuples(st.integers(-3, 3), st.integers(-2, 2)).filter(lambda c: c != (0, 0))
    word = st.tuples(coeff, st.lists(factor_strategy(alg), min_size=0, max_size=max_len))

    def build(words):
        out = alg.zero()
        for (re_, im_), facs in words:
            t = alg.scalar((re_, im_))
            for f in facs:
                t = t * f
            out = out + t
        return out

    return st.lists(word, min_size=1, max_size=max_terms).map(build)
