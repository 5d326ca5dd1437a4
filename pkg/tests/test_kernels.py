import json
import os
import subprocess
import sys

import numpy as np
import pytest

from schreier_kit import SchreierFamily, kernels
from schreier_kit.family import incidence_matrix
from schreier_kit.isometry import all_signed_permutations

needs_numba = pytest.mark.skipif(not kernels.HAVE_NUMBA, reason="numba not installed")


def s1_incidence(N):
    fam = SchreierFamily(1, 12)
    return incidence_matrix(fam.maximal_elements(range(1, N + 1)), N)


def test_numpy_family_norms_by_hand():
    A = s1_incidence(3)
    X = np.array([[1.0, 1.0, 1.0], [3.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    vals, rows = kernels.family_norms(X, A, 2.0, backend="numpy")
    assert vals[0] == pytest.approx(np.sqrt(2)) and vals[1] == 3.0 and vals[2] == 0.0
    assert A[rows[0]].tolist() == [0, 1, 1]


@needs_numba
@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_family_norm_backends_agree(p):
    rng = np.random.default_rng(0)
    A = s1_incidence(7)
    X = rng.standard_normal((500, 7))
    a, ia = kernels.family_norms(X, A, p, backend="numpy")
    b, ib = kernels.family_norms(X, A, p, backend="numba")
    assert np.max(np.abs(a - b)) <= 1e-12
    assert np.array_equal(ia, ib)


@needs_numba
def test_lm_backends_agree():
    rng = np.random.default_rng(1)
    N = 2
    A = s1_incidence(N)
    X = rng.standard_normal((30, N))
    X /= kernels.family_norms(X, A, 3.0)[0][:, None]
    starts = rng.standard_normal((6, N, N))
    perms = all_signed_permutations(N)
    a = kernels.lm_restarts(starts, X, A, 3.0, perms, 0.5, 1.0, 25, backend="numpy")
    b = kernels.lm_restarts(starts, X, A, 3.0, perms, 0.5, 1.0, 25, backend="numba")
    for u, v in zip(a, b):
        assert np.allclose(u, v, rtol=1e-7, atol=1e-9, equal_nan=True)


def test_disable_flag_selects_numpy_in_a_fresh_process():
    code = ("import json; from schreier_kit import kernels, SchreierFamily;"
            "from schreier_kit.norms import norm;"
            "print(json.dumps([kernels.BACKEND, norm(SchreierFamily(1, 12), 2, [1, 1, 1]).value]))")
    env = dict(os.environ, SCHREIER_KIT_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    backend, value = json.loads(out.stdout)
    assert backend == "numpy" and value == pytest.approx(np.sqrt(2), abs=1e-12)
