from fastapi.testclient import TestClient

from subspacenet import __version__
from subspacenet.scenario import load_scenario
from subspacenet.service.app import create_app

CONFIG = """
scenario.L = 5
scenario.N = 5
scenario.r_star = 2
scenario.topology = ring
scenario.seed = 3
algorithm.list = c_subspace, d_subspace
algorithm.mu = 0.02
run.iterations = 40
run.monte_carlo = 2
output.directory = results
"""


def client():
    return TestClient(create_app())


class TestHealth:
    def test_health(self):
        response = client().get("/health")
        assert response.status_code == 200
        assert response.json() == {"status": "ok", "version": __version__}


class TestValidate:
    def test_valid_config(self):
        response = client().post("/experiments/validate", json={"config_text": CONFIG})
        assert response.status_code == 200
        assert response.json() == {"valid": True, "errors": []}

    def test_invalid_config_lists_error(self):
        response = client().post(
            "/experiments/validate", json={"config_text": "algorithm.mu = -1\n"}
        )
        body = response.json()
        assert response.status_code == 200
        assert body["valid"] is False
        assert "algorithm.mu" in body["errors"][0]


class TestRun:
    def test_successful_run_returns_files(self):
        response = client().post("/experiments/run", json={"config_text": CONFIG})
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "ok"
        assert body["output_directory"] == "results"
        assert set(body["files"]) == {"msd_c_subspace.csv", "msd_d_subspace.csv", "summary.txt"}
        csv = body["files"]["msd_d_subspace.csv"].splitlines()
        assert csv[0] == "iteration,msd_linear,msd_db"
        assert len(csv) == 42  # header + iterations 0..40
        assert set(body["steady_state_db"]) == {"c_subspace", "d_subspace"}
        assert "transfers_per_iteration = " in body["files"]["summary.txt"]

    def test_per_node_columns(self):
        text = CONFIG + "output.per_node = true\n"
        response = client().post("/experiments/run", json={"config_text": text})
        header = response.json()["files"]["msd_c_subspace.csv"].splitlines()[0]
        assert header.endswith(",node_1,node_2,node_3,node_4,node_5")

    def test_config_error_maps_to_422(self):
        response = client().post(
            "/experiments/run", json={"config_text": "scenario.r_star = 99\n"}
        )
        assert response.status_code == 422
        assert "scenario.r_star" in response.json()["detail"]

    def test_structural_error_maps_to_422(self):
        text = (
            "scenario.L = 6\nscenario.N = 6\nscenario.r_star = 3\n"
            "scenario.topology = star\nalgorithm.list = d_subspace\n"
        )
        response = client().post("/experiments/run", json={"config_text": text})
        assert response.status_code == 422
        assert "neighborhood" in response.json()["detail"].lower()

    def test_divergence_reported_with_context(self):
        text = CONFIG.replace("algorithm.mu = 0.02", "algorithm.mu = 25")
        response = client().post("/experiments/run", json={"config_text": text})
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "diverged"
        info = body["divergence"]
        assert info["algorithm"] in ("c_subspace", "d_subspace")
        assert info["iteration"] >= 1
        summary = body["files"]["summary.txt"]
        assert "status = diverged" in summary
        assert f"algorithm = {info['algorithm']}" in summary
        assert f"run = {info['run_index']}" in summary
        assert f"iteration = {info['iteration']}" in summary

    def test_seed_override_changes_result(self):
        base = client().post("/experiments/run", json={"config_text": CONFIG})
        other = client().post("/experiments/run", json={"config_text": CONFIG, "seed": 99})
        assert (
            base.json()["files"]["msd_d_subspace.csv"]
            != other.json()["files"]["msd_d_subspace.csv"]
        )

    def test_negative_seed_override_rejected(self):
        response = client().post(
            "/experiments/run", json={"config_text": CONFIG, "seed": -1}
        )
        assert response.status_code == 422


class TestDump:
    def test_dump_round_trips(self):
        response = client().post("/scenarios/dump", json={"config_text": CONFIG})
        assert response.status_code == 200
        body = response.json()
        assert body["filename"] == "scenario.txt"
        loaded = load_scenario(body["content"])
        assert loaded.model.dim == 5
        assert loaded.seed == 3
        # same config, same snapshot
        again = client().post("/scenarios/dump", json={"config_text": CONFIG})
        assert again.json()["content"] == body["content"]

    def test_dump_applies_seed_override(self):
        a = client().post("/scenarios/dump", json={"config_text": CONFIG, "seed": 8})
        b = client().post("/scenarios/dump", json={"config_text": CONFIG})
        assert a.json()["content"] != b.json()["content"]
        assert load_scenario(a.json()["content"]).seed == 8

    def test_dump_rejects_bad_config(self):
        response = client().post("/scenarios/dump", json={"config_text": "nope\n"})
        assert response.status_code == 422
