"""Acceptance suite: one test per criterion, each printing a pass line and
enforcing its runtime budget (run with ``pytest tests/test_acceptance.py -v -s``)."""

import time

import numpy as np

from subspacenet.algorithms import c_subspace_step, d_subspace_step, initial_states
from subspacenet.cli import main as cli_main
from subspacenet.config import parse_config
from subspacenet.linalg import projector_from_coefficients
from subspacenet.network import (
    build_index_map,
    format_edge_list,
    full_topology,
    identity_combination,
    metropolis_combination,
    random_connected_topology,
    ring_topology,
    uniform_combination,
    validate_combination,
)
from subspacenet.runner import run_experiment
from subspacenet.scenario import (
    DataSample,
    derive_local_subspaces,
    draw_sample,
    exact_gradient,
    generate_global_subspace,
    generate_sample_arrays,
    load_scenario,
    make_tasks,
    stochastic_gradient,
)


def well_conditioned_theta(rng, r, m, cond_limit=1e3):
    while True:
        theta = rng.standard_normal((r, m))
        s = np.linalg.svd(theta, compute_uv=False)
        if s[-1] > 0 and s[0] / s[-1] <= cond_limit:
            return theta


class _Timer:
    def __init__(self, number, name, budget):
        self.number, self.name, self.budget = number, name, budget

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        if exc_type is None:
            print(f"criterion {self.number} ({self.name}): PASS in {elapsed:.2f}s "
                  f"(budget {self.budget:g}s)")
            assert elapsed < self.budget, f"criterion {self.number} exceeded {self.budget}s"
        else:
            print(f"criterion {self.number} ({self.name}): FAIL after {elapsed:.2f}s")
        return False


def test_criterion_1_projector_suite():
    with _Timer(1, "projector properties on 200 random coefficient matrices", 5.0):
        rng = np.random.default_rng(101)
        for _ in range(200):
            m = int(rng.integers(1, 21))
            r = int(rng.integers(1, m + 1))
            theta = well_conditioned_theta(rng, r, m)
            p = projector_from_coefficients(theta).matrix
            scale = max(1.0, float(np.linalg.norm(p)))
            assert np.linalg.norm(p @ p - p) <= 1e-10 * scale
            assert np.linalg.norm(p - p.T) <= 1e-10 * scale
            assert np.linalg.norm(p @ theta.T - theta.T) <= 1e-10 * max(
                1.0, float(np.linalg.norm(theta))
            )
            eigs = np.linalg.eigvalsh(p)
            assert int((eigs > 0.5).sum()) == r


def test_criterion_2_diagonal_loading_continuity():
    with _Timer(2, "projector continuity in the loading factor", 1.0):
        rng = np.random.default_rng(102)
        for _ in range(20):
            m = int(rng.integers(2, 16))
            r = int(rng.integers(1, m + 1))
            theta = well_conditioned_theta(rng, r, m, cond_limit=10.0)
            base = projector_from_coefficients(theta).matrix
            sigma_min = float(np.linalg.svd(theta @ theta.T, compute_uv=False)[-1])
            for eta in (1e-8, 1e-6, 1e-4):
                shifted = projector_from_coefficients(theta, eta).matrix
                assert np.linalg.norm(shifted - base) <= 10.0 * eta / sigma_min


def test_criterion_3_fixed_point_at_optimum():
    with _Timer(3, "exact-gradient fixed point at the optimum", 1.0):
        topo = ring_topology(10)
        model = generate_global_subspace(10, 10, 2, 303)
        tasks = make_tasks(model, noise_variance=0.01)
        locals_ = derive_local_subspaces(model, topo, mode="dense")
        imap = build_index_map(topo)
        comb = uniform_combination(topo)
        proj = projector_from_coefficients(model.coefficients)
        norms = np.linalg.norm(model.w_star, axis=0)

        states_c = initial_states(model.w_star, 0.05)
        states_d = initial_states(model.w_star, 0.05)
        for _ in range(100):
            states_c = c_subspace_step(states_c, None, proj, tasks=tasks)
            states_d = d_subspace_step(states_d, None, topo, imap, locals_, comb, tasks=tasks)
            for states in (states_c, states_d):
                for k0, s in enumerate(states):
                    gap = np.linalg.norm(s.w - model.w_star[:, k0])
                    assert gap <= 1e-12 * norms[k0]


def test_criterion_4_centralized_distributed_equivalence():
    with _Timer(4, "distributed equals centralized on a complete graph", 5.0):
        topo = full_topology(6)
        model = generate_global_subspace(8, 6, 3, 404)
        tasks = make_tasks(model, noise_variance=0.01)
        locals_ = derive_local_subspaces(model, topo, mode="dense")
        imap = build_index_map(topo)
        comb = identity_combination(topo)
        proj = projector_from_coefficients(model.coefficients)
        u_all, d_all = generate_sample_arrays(tasks, 1000, master_seed=404, run_index=0)

        states_c = initial_states(np.zeros((8, 6)), 0.02)
        states_d = initial_states(np.zeros((8, 6)), 0.02)
        worst = 0.0
        for n in range(1000):
            samples = [
                DataSample(node=k0 + 1, time=n, u=u_all[n, k0], d=float(d_all[n, k0]))
                for k0 in range(6)
            ]
            states_c = c_subspace_step(states_c, samples, proj)
            states_d = d_subspace_step(states_d, samples, topo, imap, locals_, comb)
            for sc, sd in zip(states_c, states_d):
                ref = float(np.linalg.norm(sc.w))
                gap = float(np.linalg.norm(sd.w - sc.w))
                assert gap <= 1e-12 * (1.0 + ref)
                worst = max(worst, gap / (1.0 + ref))
        print(f"  worst relative trajectory gap: {worst:.2e}")


def test_criterion_5_deterministic_convergence(tmp_path):
    with _Timer(5, "exact-gradient convergence below -200 dB", 10.0):
        topo = random_connected_topology(10, 0.35, np.random.default_rng(2024), min_size=3)
        assert min(len(nbrs) for nbrs in topo.neighborhoods) >= 3
        edge_file = tmp_path / "graph.txt"
        edge_file.write_text(format_edge_list(topo))
        cfg = parse_config(
            "scenario.L = 10\n"
            "scenario.N = 10\n"
            "scenario.r_star = 2\n"
            "scenario.topology = file\n"
            f"scenario.topology_file = {edge_file}\n"
            "scenario.seed = 17\n"
            "algorithm.list = c_subspace, d_subspace\n"
            "algorithm.mu = 0.05\n"
            "algorithm.gradient = exact\n"
            "algorithm.init = gaussian\n"
            "run.iterations = 5000\n"
        )
        result = run_experiment(cfg)
        for label in ("c_subspace", "d_subspace"):
            trace = result.traces[label]
            assert trace.db[-1] <= -200.0, f"{label} ended at {trace.db[-1]:.1f} dB"
            assert (np.diff(trace.linear) <= 1e-12).all(), f"{label} MSD increased"


def test_criterion_6_stochastic_benefit_of_projection():
    with _Timer(6, "projected strategy beats the unprojected baseline", 120.0):
        cfg = parse_config(
            "scenario.L = 10\n"
            "scenario.N = 10\n"
            "scenario.r_star = 2\n"
            "scenario.local_mode = dense\n"
            "scenario.topology = ring\n"
            "scenario.seed = 2718\n"
            "scenario.noise_variance = 0.01\n"
            "algorithm.list = d_subspace, diffusion_baseline\n"
            "algorithm.mu = 0.01\n"
            "run.iterations = 3000\n"
            "run.monte_carlo = 50\n"
        )
        result = run_experiment(cfg)
        projected = result.steady_state_db["d_subspace"]
        baseline = result.steady_state_db["diffusion_baseline"]
        margin = baseline - projected
        # reference run for this config measured a 36.8 dB margin
        print(f"  steady state: d_subspace {projected:.2f} dB, "
              f"baseline {baseline:.2f} dB, margin {margin:.2f} dB")
        assert margin >= 3.0


def test_criterion_7_combination_matrix_suite():
    with _Timer(7, "combination generators on 50 random graphs", 2.0):
        rng = np.random.default_rng(707)
        for _ in range(50):
            n = int(rng.integers(2, 31))
            topo = random_connected_topology(n, 0.3, rng)
            for rule in (uniform_combination, metropolis_combination, identity_combination):
                assert validate_combination(rule(topo), topo) == []
            a = metropolis_combination(topo).weights
            assert np.abs(a - a.T).max() <= 1e-15


def test_criterion_8_gradient_cross_checks():
    with _Timer(8, "gradient oracles", 10.0):
        rng = np.random.default_rng(808)
        h = 1e-6
        for _ in range(100):
            dim = int(rng.integers(2, 8))
            u = rng.standard_normal(dim)
            w = rng.standard_normal(dim)
            d = float(rng.standard_normal())
            grad = stochastic_gradient(w, DataSample(node=1, time=0, u=u, d=d))

            def loss(vec):
                return (d - float(u @ vec)) ** 2

            fd = np.array(
                [(loss(w + h * e) - loss(w - h * e)) / (2 * h) for e in np.eye(dim)]
            )
            assert np.linalg.norm(fd - grad) <= 1e-6 * max(1.0, float(np.linalg.norm(grad)))

        model = generate_global_subspace(5, 2, 2, 808)
        task = make_tasks(model, noise_variance=0.01)[0]
        w = task.w_star + rng.standard_normal(5) / np.sqrt(5)
        expected = exact_gradient(w, task)
        n = 100_000
        acc = np.zeros(5)
        for i in range(n):
            acc += stochastic_gradient(w, draw_sample(task, rng, time=i))
        gap = float(np.linalg.norm(acc / n - expected))
        assert gap <= 0.02 * float(np.linalg.norm(expected))


def test_criterion_9_reproducibility(tmp_path):
    with _Timer(9, "byte-identical reruns and exact snapshot round-trip", 60.0):
        cfg_path = tmp_path / "exp.cfg"
        cfg_path.write_text(
            "scenario.L = 8\n"
            "scenario.N = 7\n"
            "scenario.r_star = 2\n"
            "scenario.topology = random\n"
            "scenario.topology_p = 0.5\n"
            "scenario.seed = 909\n"
            "algorithm.list = c_subspace, d_subspace, diffusion_baseline\n"
            "algorithm.mu = 0.02\n"
            "run.iterations = 200\n"
            "run.monte_carlo = 3\n"
            "output.per_node = true\n"
            f"output.directory = {tmp_path / 'unused'}\n"
        )
        assert cli_main(["run", str(cfg_path), "--out", str(tmp_path / "a")]) == 0
        assert cli_main(["run", str(cfg_path), "--out", str(tmp_path / "b")]) == 0
        names = sorted(p.name for p in (tmp_path / "a").iterdir())
        assert names == [
            "msd_c_subspace.csv",
            "msd_d_subspace.csv",
            "msd_diffusion_baseline.csv",
            "summary.txt",
        ]
        for name in names:
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

        assert cli_main(["dump-scenario", str(cfg_path), "--out", str(tmp_path / "snap")]) == 0
        snapshot = (tmp_path / "snap" / "scenario.txt").read_text()
        loaded = load_scenario(snapshot)
        model = generate_global_subspace(8, 7, 2, 909)
        assert np.array_equal(loaded.model.w_star, model.w_star)
        # a reload-dump cycle reproduces the snapshot text itself
        from subspacenet.scenario import dump_scenario

        again = dump_scenario(
            loaded.model,
            loaded.topology,
            loaded.rows_per_node,
            seed=loaded.seed,
            generator=loaded.generator,
            local_mode=loaded.local_mode,
            loading=loaded.loading,
        )
        assert again == snapshot
