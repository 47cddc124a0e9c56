import json
import sys
import textwrap

import numpy as np
import pytest

from leafage.errors import ModelError
from leafage.models import ExternalModel, external_predict

SIGN_STUB = textwrap.dedent(
    """
    import json, sys
    for line in sys.stdin:
        req = json.loads(line)
        labels = [1 if row[0] >= 0 else 0 for row in req["instances"]]
        print(json.dumps({"labels": labels}), flush=True)
    """
)


def stub_command(tmp_path, source, name="stub.py"):
    path = tmp_path / name
    path.write_text(source)
    return [sys.executable, str(path)]


@pytest.fixture
def sign_model(tmp_path):
    with ExternalModel(stub_command(tmp_path, SIGN_STUB), n_features=1) as model:
        yield model


class TestProtocol:
    def test_response_length_matches_request(self, sign_model):
        labels = external_predict(sign_model, np.array([[1.0], [2.0]]))
        assert labels.shape == (2,)

    def test_sign_stub_values(self, sign_model):
        labels = external_predict(sign_model, np.array([[1.0], [-1.0]]))
        assert labels.tolist() == [1, 0]

    def test_batch_of_100_matches_direct_evaluation(self, sign_model):
        rows = np.random.default_rng(0).normal(size=(100, 1))
        labels = external_predict(sign_model, rows)
        expected = (rows[:, 0] >= 0).astype(int)
        assert np.array_equal(labels, expected)

    def test_repeated_requests_on_one_handle(self, sign_model):
        for _ in range(5):
            labels = external_predict(sign_model, np.array([[3.0]]))
            assert labels.tolist() == [1]


class TestFailureModes:
    def test_process_exit_mid_request(self, tmp_path):
        dying = "import sys; sys.stdin.readline(); sys.exit(1)\n"
        with ExternalModel(stub_command(tmp_path, dying), n_features=1) as model:
            with pytest.raises(ModelError, match="exited"):
                model.predict_labels(np.array([[1.0]]))

    def test_malformed_response(self, tmp_path):
        babbler = textwrap.dedent(
            """
            import sys
            for line in sys.stdin:
                print("not json at all", flush=True)
            """
        )
        with ExternalModel(stub_command(tmp_path, babbler), n_features=1) as model:
            with pytest.raises(ModelError, match="malformed"):
                model.predict_labels(np.array([[1.0]]))

    def test_wrong_label_count(self, tmp_path):
        short = textwrap.dedent(
            """
            import json, sys
            for line in sys.stdin:
                print(json.dumps({"labels": [1]}), flush=True)
            """
        )
        with ExternalModel(stub_command(tmp_path, short), n_features=1) as model:
            with pytest.raises(ModelError, match="must carry 2 labels"):
                model.predict_labels(np.array([[1.0], [2.0]]))

    def test_timeout(self, tmp_path):
        sleeper = textwrap.dedent(
            """
            import sys, time
            sys.stdin.readline()
            time.sleep(30)
            """
        )
        with ExternalModel(
            stub_command(tmp_path, sleeper), n_features=1, timeout_ms=300
        ) as model:
            with pytest.raises(ModelError, match="timed out"):
                model.predict_labels(np.array([[1.0]]))

    def test_launch_failure(self):
        with pytest.raises(ModelError, match="cannot launch"):
            ExternalModel(["/nonexistent/binary"], n_features=1)

    def test_non_binary_labels_rejected(self, tmp_path):
        weird = textwrap.dedent(
            """
            import json, sys
            for line in sys.stdin:
                print(json.dumps({"labels": [7]}), flush=True)
            """
        )
        with ExternalModel(stub_command(tmp_path, weird), n_features=1) as model:
            with pytest.raises(ModelError, match="0/1"):
                model.predict_labels(np.array([[1.0]]))
