import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from iccgabp.estimator import JointIccReceiver
from iccgabp.harness import Scenario, draw_trials
from iccgabp.gabp import run_detector
from iccgabp.system_model import SystemConfig, qpsk_demodulate


@pytest.fixture
def block():
    cfg = SystemConfig().with_snr_db(8)
    return draw_trials(cfg, Scenario("10x2", 10, 2), 0, range(40))


class TestJointIccReceiver:
    def test_params_round_trip(self):
        rx = JointIccReceiver(i_max=12, mean_mode="known-zero")
        assert rx.get_params()["i_max"] == 12
        twin = clone(rx)
        assert twin.get_params() == rx.get_params()
        rx.set_params(beta_d=0.3)
        assert rx.beta_d == 0.3

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            JointIccReceiver().predict(np.zeros((1, 4)))

    def test_matches_detector(self, block):
        H, bits, d, s, y = block
        rx = JointIccReceiver().fit(H, noise_var=10 ** -0.8)
        ref = run_detector(SystemConfig(sigma_w_sq=10 ** -0.8), y, H)
        np.testing.assert_array_equal(rx.transform(y), ref.d_hat_final)
        np.testing.assert_array_equal(rx.predict(y), qpsk_demodulate(ref.d_hat_final))
        assert rx.score(y, bits) > 0.99

    def test_shared_channel(self, block):
        H, bits, d, s, y = block
        rx = JointIccReceiver().fit(H[0], noise_var=0.1)
        assert rx.predict(y[0]).shape == (1, 4)
        assert rx.predict_function(y[:3]).shape == (3,)

    def test_function_estimate(self, block):
        H, bits, d, s, y = block
        rx = JointIccReceiver(mean_mode="known-zero").fit(H, noise_var=10 ** -0.8)
        err = np.mean((rx.predict_function(y) - s.sum(1)) ** 2)
        assert err < np.mean(s.sum(1) ** 2)

    @pytest.mark.parametrize("H, kw", [
        (np.zeros(4), {}),
        (np.zeros((1, 2)), {}),
        (np.full((4, 2), np.nan), {}),
        (np.zeros((4, 2)), {"noise_var": -1.0}),
    ])
    def test_fit_validation(self, H, kw):
        with pytest.raises(ValueError):
            JointIccReceiver().fit(H, noise_var=kw.get("noise_var", 0.1))

    def test_invalid_hyperparameter(self):
        with pytest.raises(ValueError, match="must equal 1"):
            JointIccReceiver(e_d=0.5).fit(np.ones((4, 2)), noise_var=0.1)

    def test_received_validation(self, block):
        H = block[0]
        rx = JointIccReceiver().fit(H, noise_var=0.1)
        with pytest.raises(ValueError):
            rx.predict(np.zeros((40, 3)))
        with pytest.raises(ValueError, match="channel realisations"):
            rx.predict(np.zeros((7, 10)))
