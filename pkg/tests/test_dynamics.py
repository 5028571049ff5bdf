import numpy as np
import pytest

from stringdyn.dynamics import (
    ObservableSeries,
    PropagatorError,
    TimeGrid,
    Trajectory,
    basis_state,
    evolve_dense,
    evolve_krylov,
    matter_diagonal,
    measure,
)
from stringdyn.gauge import ChargeLayout, U1_QLM, enumerate_sector
from stringdyn.lattice import CYLINDER, LatticeSpec, OPEN, SQUARE, build_lattice
from stringdyn.models import Couplings, build_u1_qlm
from stringdyn.strings import (
    build_minimal_model,
    build_string_state,
    enumerate_minimal_strings,
    enumerate_resonant_manifold,
)


def random_hermitian(n, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def test_time_grid_validation():
    with pytest.raises(ValueError):
        TimeGrid(-1.0, 10)
    with pytest.raises(ValueError):
        TimeGrid(1.0, 1)
    grid = TimeGrid(10.0, 101)
    t = grid.times
    assert t[0] == 0 and t[-1] == 10.0 and np.all(np.diff(t) > 0)


def test_two_level_rabi():
    J = 0.7
    H = np.array([[0.0, -J], [-J, 0.0]])
    grid = TimeGrid(5.0, 101)
    traj = evolve_dense(H, basis_state(2, 0), grid)
    fid = np.abs(traj.states[:, 0]) ** 2
    assert np.abs(fid - np.cos(J * grid.times) ** 2).max() < 1e-12


def test_dense_identity_and_diagonal():
    H = np.diag([0.3, -1.2, 2.0])
    psi0 = np.array([0.5, 0.5j, np.sqrt(0.5)])
    grid = TimeGrid(3.0, 31)
    traj = evolve_dense(H, psi0, grid)
    assert np.abs(traj.states[0] - psi0).max() < 1e-14
    probs = np.abs(traj.states) ** 2
    assert np.abs(probs - probs[0]).max() < 1e-12


def test_dense_rejects_non_hermitian():
    H = np.array([[0.0, 1.0], [0.5, 0.0]])
    with pytest.raises(ValueError):
        evolve_dense(H, basis_state(2, 0), TimeGrid(1.0, 5))
    with pytest.raises(ValueError):
        evolve_krylov(H, basis_state(2, 0), TimeGrid(1.0, 5))


def test_krylov_matches_dense_random_100():
    H = random_hermitian(100, seed=42)
    rng = np.random.default_rng(1)
    psi0 = rng.normal(size=100) + 1j * rng.normal(size=100)
    grid = TimeGrid(10.0, 101)
    dense = evolve_dense(H, psi0, grid)
    krylov = evolve_krylov(H, psi0, grid)
    assert np.abs(dense.states - krylov.states).max() <= 1e-8
    assert krylov.norm_error.max() <= 1e-10


def test_krylov_eigenstate_stationary():
    H = random_hermitian(40, seed=3)
    evals, evecs = np.linalg.eigh(H)
    grid = TimeGrid(8.0, 41)
    traj = evolve_krylov(H, evecs[:, 5], grid)
    fid = np.abs(traj.states @ evecs[:, 5].conj()) ** 2
    assert np.abs(fid - 1).max() < 1e-10


def test_krylov_zero_hamiltonian():
    H = np.zeros((8, 8))
    psi0 = basis_state(8, 2)
    traj = evolve_krylov(H, psi0, TimeGrid(4.0, 17))
    assert np.abs(traj.states - psi0[None, :]).max() < 1e-12


def test_time_reversal():
    H = random_hermitian(60, seed=9)
    rng = np.random.default_rng(2)
    psi0 = rng.normal(size=60) + 1j * rng.normal(size=60)
    psi0 /= np.linalg.norm(psi0)
    grid = TimeGrid(6.0, 61)
    fwd = evolve_krylov(H, psi0, grid)
    back = evolve_krylov(-H, fwd.states[-1], grid)
    assert np.abs(back.states[-1] - psi0).max() <= 1e-8


def test_energy_conservation_krylov():
    H = random_hermitian(80, seed=17)
    rng = np.random.default_rng(4)
    psi0 = rng.normal(size=80) + 1j * rng.normal(size=80)
    grid = TimeGrid(10.0, 51)
    traj = evolve_krylov(H, psi0, grid)
    psi0n = psi0 / np.linalg.norm(psi0)
    e = np.array([np.real(np.vdot(s, H @ s)) for s in traj.states])
    width = float(np.ptp(np.linalg.eigvalsh(H)))
    assert np.abs(e - e[0]).max() <= 1e-8 * width


def test_krylov_nonconvergence_diagnostics():
    H = random_hermitian(50, seed=5) * 1e6
    grid = TimeGrid(10.0, 3, max_subdivisions=1)
    with pytest.raises(PropagatorError) as err:
        evolve_krylov(H, basis_state(50, 0), grid, tol=1e-16, max_krylov=3)
    d = err.value.diagnostics
    assert {"grid_index", "dt", "substeps", "last_residual", "tolerance"} <= set(d)


@pytest.fixture(scope="module")
def resonant_minimal():
    lat = build_lattice(LatticeSpec(SQUARE, 7, 6, CYLINDER))
    layout = ChargeLayout.string_pair(lat, lat.site_id(1, 0), lat.site_id(5, 3))
    seed = build_string_state(lat, layout, "l_shaped")
    strings = enumerate_minimal_strings(lat, layout, seed)
    c = Couplings(1.0, 12.0, 24.0, 0.0)
    basis = enumerate_resonant_manifold(lat, layout, strings, c)
    seed_id = next(i for i, s in enumerate(strings) if s.bits == seed.bits)
    return lat, layout, strings, basis, seed_id


def test_measure_initial_point(resonant_minimal):
    lat, layout, strings, basis, seed_id = resonant_minimal
    H = build_minimal_model(basis, Couplings(1.0, 12.0, 24.0, 1.0))
    dim = basis.dimension
    psi0 = basis_state(dim, basis.string_ordinal(seed_id))
    others = [
        basis_state(dim, basis.string_ordinal(s))
        for s in range(len(strings))
        if s != seed_id
    ]
    traj = evolve_dense(H, psi0, TimeGrid(10.0, 101))
    series = measure(traj, psi0, others, basis.patch_sites)
    assert series.fidelity[0] == pytest.approx(1.0, abs=1e-12)
    assert series.overlap_other_strings[0] == pytest.approx(0.0, abs=1e-12)
    assert series.matter_occupation[0] == pytest.approx(0.0, abs=1e-12)
    assert np.all(series.fidelity + series.overlap_other_strings <= 1 + 1e-10)


def test_measure_single_break_occupation(resonant_minimal):
    lat, layout, strings, basis, seed_id = resonant_minimal
    one_break = next(
        i for i, (sid, broken) in enumerate(basis.labels)
        if sid == seed_id and len(broken) == 1
    )
    diag = matter_diagonal(basis, basis.patch_sites)
    assert diag[one_break] == 2.0


def test_j0_overlap_stays_zero(resonant_minimal):
    lat, layout, strings, basis, seed_id = resonant_minimal
    H = build_minimal_model(basis, Couplings(1.0, 12.0, 24.0, 0.0))
    dim = basis.dimension
    psi0 = basis_state(dim, basis.string_ordinal(seed_id))
    others = [
        basis_state(dim, basis.string_ordinal(s))
        for s in range(len(strings))
        if s != seed_id
    ]
    traj = evolve_dense(H, psi0, TimeGrid(10.0, 201))
    series = measure(traj, psi0, others, basis.patch_sites)
    assert series.overlap_other_strings.max() <= 1e-12
    # analytic reference: four independent breakable links
    assert np.abs(series.fidelity - np.cos(traj.times) ** 8).max() < 1e-10


def test_j_sweep_overlap_ordering(resonant_minimal):
    lat, layout, strings, basis, seed_id = resonant_minimal
    dim = basis.dimension
    psi0 = basis_state(dim, basis.string_ordinal(seed_id))
    others = [
        basis_state(dim, basis.string_ordinal(s))
        for s in range(len(strings))
        if s != seed_id
    ]
    grid = TimeGrid(10.0, 201)
    means = {}
    for j in (0.0, 1.0, 2.0):
        H = build_minimal_model(basis, Couplings(1.0, 12.0, 24.0, j))
        series = measure(evolve_dense(H, psi0, grid), psi0, others, basis.patch_sites)
        means[j] = series.overlap_other_strings.mean()
    assert means[0.0] == 0.0
    assert means[1.0] > 0 and means[2.0] > 0


def test_krylov_on_minimal_model(resonant_minimal):
    lat, layout, strings, basis, seed_id = resonant_minimal
    H = build_minimal_model(basis, Couplings(1.0, 12.0, 24.0, 1.0))
    dim = basis.dimension
    psi0 = basis_state(dim, basis.string_ordinal(seed_id))
    grid = TimeGrid(10.0, 51)
    dense = evolve_dense(H, psi0, grid)
    krylov = evolve_krylov(H, psi0, grid)
    assert np.abs(dense.states - krylov.states).max() <= 1e-8


def test_measure_basis_mismatch(resonant_minimal):
    lat, layout, strings, basis, seed_id = resonant_minimal
    H = build_minimal_model(basis, Couplings(1.0, 12.0, 24.0, 0.0))
    psi0 = basis_state(basis.dimension, 0)
    traj = evolve_dense(H, psi0, TimeGrid(1.0, 5))
    with pytest.raises(ValueError):
        measure(traj, basis_state(3, 0), [], basis.patch_sites)
    with pytest.raises(ValueError):
        measure(traj, psi0, [basis_state(4, 0)], basis.patch_sites)


def test_series_validation():
    t = np.linspace(0, 1, 5)
    good = ObservableSeries(t, np.ones(5), np.zeros(5), np.zeros(5), np.ones(5), np.zeros(5))
    good.validate()
    bad = ObservableSeries(t, np.ones(5) * 1.5, np.zeros(5), np.zeros(5), np.ones(5), np.zeros(5))
    with pytest.raises(AssertionError):
        bad.validate()
    drift = ObservableSeries(t, np.ones(5), np.zeros(5), np.zeros(5),
                             np.array([1, 1, 1, 1, 2.0]), np.zeros(5))
    with pytest.raises(AssertionError):
        drift.validate()


def test_unitarity_both_propagators(resonant_minimal):
    lat, layout, strings, basis, seed_id = resonant_minimal
    H = build_minimal_model(basis, Couplings(1.0, 12.0, 24.0, 2.0))
    psi0 = basis_state(basis.dimension, basis.string_ordinal(seed_id))
    grid = TimeGrid(10.0, 41)
    for traj in (evolve_dense(H, psi0, grid), evolve_krylov(H, psi0, grid)):
        norms = np.linalg.norm(traj.states, axis=1)
        assert np.abs(norms - 1).max() <= 1e-10
