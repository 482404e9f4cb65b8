import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from azrenyi.channels import PROVEN, classify_region, dpi_check, random_channel
from azrenyi.divergence import d_alpha_z, f_pq, trace_functional
from azrenyi.limits import limit_alpha_inf, limit_alpha1
from azrenyi.matkit import matrix_power_spectral
from azrenyi.propcheck import ComplexSegment, approximation_constant, pq_region
from azrenyi.states import RandomSpec, random_density, random_positive, random_unitary, stream

settings.register_profile("azrenyi", max_examples=40, deadline=None)
settings.load_profile("azrenyi")

dims = st.integers(2, 4)
seeds = st.integers(0, 2**31)
alphas = st.floats(0.1, 3.0).filter(lambda a: abs(a - 1) > 1e-3)
zs = st.floats(0.3, 3.0)


def pair(dim, seed, rank=None):
    return random_density(RandomSpec(dim, rank, seed)), random_density(RandomSpec(dim, None, seed + 1))


@given(dims, seeds, alphas, zs)
def test_even_in_z(dim, seed, alpha, z):
    rho, sigma = pair(dim, seed)
    assert abs(d_alpha_z(rho, sigma, alpha, z) - d_alpha_z(rho, sigma, alpha, -z)) < 1e-10


@given(dims, seeds, alphas, zs)
def test_unitary_invariance(dim, seed, alpha, z):
    rho, sigma = pair(dim, seed)
    U = random_unitary(dim, seed + 2)
    rot = lambda X: U @ X @ U.conj().T
    assert abs(d_alpha_z(rho, sigma, alpha, z) - d_alpha_z(rot(rho), rot(sigma), alpha, z)) < 1e-9


@given(dims, seeds, st.floats(0.1, 0.9), zs)
def test_skew_symmetry(dim, seed, alpha, z):
    rho, sigma = pair(dim, seed)
    lhs = (alpha - 1) * d_alpha_z(rho, sigma, alpha, z)
    assert abs(lhs + alpha * d_alpha_z(sigma, rho, 1 - alpha, z)) < 1e-9


@given(dims, seeds, alphas, zs, st.floats(0.1, 10.0))
def test_scaling(dim, seed, alpha, z, c):
    rho, sigma = pair(dim, seed)
    D = d_alpha_z(rho, sigma, alpha, z)
    assert abs(d_alpha_z(c * rho, sigma, alpha, z) - D - math.log2(c)) < 1e-9
    assert abs(d_alpha_z(rho, c * sigma, alpha, z) - D + math.log2(c)) < 1e-9


@given(dims, seeds, alphas, zs)
def test_self_divergence_vanishes(dim, seed, alpha, z):
    rho, _ = pair(dim, seed)
    assert abs(d_alpha_z(rho, rho, alpha, z)) < 1e-9


@given(dims, seeds, alphas, zs)
def test_functional_forms_agree(dim, seed, alpha, z):
    rho, sigma = pair(dim, seed)
    f = [trace_functional(rho, sigma, alpha, z, k) for k in (1, 2, 3)]
    assert max(f) - min(f) <= 1e-9 * max(1.0, f[2])


@given(dims, seeds, st.floats(-1.0, 2.0), st.floats(-1.0, 2.0))
def test_f_pq_transpose_symmetry(dim, seed, p, q):
    assume(abs(p + q) > 0.2)
    rng = stream(seed)
    A, K = random_positive(dim, rng, shift=0.1), rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    a, b = f_pq(A, K, p, q), f_pq(A, K.conj().T, q, p)
    assert abs(a - b) <= 1e-9 * max(1.0, abs(a))
    assert pq_region(p, q) == pq_region(q, p)


@given(dims, seeds, st.floats(0.2, 3.0))
def test_power_round_trip(dim, seed, p):
    A = random_positive(dim, seed)
    B = matrix_power_spectral(matrix_power_spectral(A, p), 1 / p)
    assert np.max(np.abs(B - A)) < 1e-9 * np.max(np.abs(A))


@given(st.integers(2, 3), seeds, st.sampled_from([(0.5, 0.5), (0.7, 0.8), (1.5, 1.0), (2.0, 2.0), (0.3, 0.9)]))
def test_dpi_in_proven_region(dim, seed, point):
    alpha, z = point
    assert classify_region(alpha, z) == PROVEN
    rng = stream(seed)
    rho = random_density(RandomSpec(dim, int(rng.integers(1, dim + 1))), rng)
    sigma = random_density(RandomSpec(dim), rng)
    ch = random_channel(dim, dim, int(rng.integers(1, dim * dim + 1)), rng)
    assert dpi_check(rho, sigma, ch, point) <= 1e-8


@given(st.floats(-3.0, 5.0), st.floats(0.01, 5.0))
def test_region_even_in_z(alpha, z):
    assert classify_region(alpha, z) == classify_region(alpha, -z)


@given(dims, seeds, st.floats(0.3, 3.0))
def test_alpha_inf_independent_of_slope_sign(dim, seed, r):
    rho, sigma = pair(dim, seed)
    assert abs(limit_alpha_inf(rho, sigma, r) - limit_alpha_inf(rho, sigma, -r)) < 1e-12


@given(dims, seeds, st.floats(0.3, 3.0))
def test_alpha1_limit_side_mapping(dim, seed, r):
    # only |r| and the side matter
    rho, sigma = pair(dim, seed)
    assert abs(limit_alpha1(rho, sigma, r, side=1) - limit_alpha1(rho, sigma, -r, side=1)) < 1e-12
    assert abs(limit_alpha1(rho, sigma, -r) - limit_alpha1(rho, sigma, r, side=-1)) < 1e-12


@given(st.integers(2, 4), seeds, st.sampled_from([0.5, 0.9, 0.99]))
def test_approximation_constant_in_bounds(dim, seed, alpha):
    rng = stream(seed)
    mu = np.sort(rng.exponential(size=dim))[::-1]
    assume(mu[0] - mu[1] > 1e-6 * mu[0])
    U = random_unitary(dim, rng)
    r = approximation_constant((U * mu) @ U.conj().T, random_positive(dim, rng), alpha)
    assert -1e-9 <= r["c"] <= r["upper"] * (1 + 1e-9)


@given(st.floats(-3.0, 2.9), st.floats(0.05, 1.0), seeds)
def test_segment_sampling_and_product(lo, frac, seed):
    width = frac * math.pi / 2
    assume(lo + width <= math.pi)
    seg = ComplexSegment(lo, lo + width)
    rng = stream(seed)
    A, B = seg.sample(2, rng), seg.sample(2, rng)
    assert seg.contains(A) and seg.contains(B)
    s_lo, s_hi = 2 * lo, 2 * (lo + width)
    if -math.pi <= s_lo and s_hi <= math.pi:
        ang = np.angle(np.linalg.eigvals(A @ B))
        assert np.all((ang > s_lo - 1e-9) & (ang < s_hi + 1e-9))
