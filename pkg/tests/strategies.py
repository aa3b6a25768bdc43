"""Hypothesis strategies for admissible attachment rules.

Parameter ranges are kept away from degenerate corners (gamma -> 1, masses
underflowing) so property tests stay fast and numerically meaningful.
"""

from hypothesis import strategies as st

from prefatt.attachment import Affine, Constant, SublinearPower, TableRule

finite = {"allow_nan": False, "allow_infinity": False}


def constants():
    return st.floats(min_value=0.05, max_value=1.0, **finite).map(Constant)


def affines():
    # gamma*0 + beta <= 1 keeps d0 = 0 admissibility at k = 0
    return st.builds(
        Affine,
        gamma=st.floats(min_value=0.05, max_value=0.95, **finite),
        beta=st.floats(min_value=0.05, max_value=1.0, **finite),
    )


def slope_one_affines():
    return st.floats(min_value=0.05, max_value=0.95, **finite).map(
        lambda g: Affine(1.0, g)
    )


def powers():
    return st.builds(
        SublinearPower,
        gamma=st.floats(min_value=0.1, max_value=1.0, **finite),
        alpha=st.floats(min_value=0.1, max_value=0.9, **finite),
        f0=st.floats(min_value=0.05, max_value=1.0, **finite),
    )


def tables(max_len: int = 6):
    # values below 1 are admissible at every k for d0 = 0
    return st.builds(
        TableRule,
        values_head=st.lists(
            st.floats(min_value=0.05, max_value=1.0, **finite),
            min_size=1,
            max_size=max_len,
        ).map(tuple),
    )


def rules():
    return st.one_of(constants(), affines(), powers(), tables())
