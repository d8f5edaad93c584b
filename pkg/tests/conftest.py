import math

import pytest

from tfatom import tf_core, zero_energy


@pytest.fixture(scope="session")
def chi():
    return tf_core.default_chi()


@pytest.fixture(scope="session")
def d_cl(chi):
    return tf_core.classical_constant(chi)


@pytest.fixture(scope="session")
def tf_spec(chi):
    return zero_energy.tf_potential_spec(chi)


@pytest.fixture(scope="session")
def exact_tail_spec():
    """Potential that equals its inverse-quartic tail exactly beyond r_c.

    Phi(r) = C (max(r, r_c))^-4 with C = 81 pi^2, r_c = 3: constant near
    the origin (alpha = 0), pure tail beyond r_c, so boundary-phase
    windows past r_c see no tail deviation at all.
    """
    import numpy as np

    c_inf = tf_core.C_INFINITY
    r_c = 3.0

    def evaluate(r):
        r = np.asarray(r, dtype=float)
        return c_inf * np.maximum(r, r_c) ** -4.0

    def eval_log_scalar(t):
        return c_inf * max(math.exp(t), r_c) ** -4.0

    return zero_energy.PotentialSpec(
        alpha=0.0, c0=c_inf / r_c**4, beta=-4.0, c_infinity=c_inf,
        eval=evaluate, name="exact-tail", eval_log_scalar=eval_log_scalar,
    )
