import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import mechlaws as ml
from mechlaws.dataset import save_dataset_csv, wrap_angle
from mechlaws.errors import InvalidInputError


def traj_1d(values, dt=0.1, label=""):
    return ml.Trajectory(dt=dt, states=np.asarray(values, dtype=float)[:, None], label=label)


class TestWrapAngle:
    def test_principal_interval(self):
        assert wrap_angle(math.pi) == pytest.approx(math.pi)
        assert wrap_angle(-math.pi) == pytest.approx(math.pi)
        assert wrap_angle(0.0) == 0.0
        assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)

    @given(st.floats(min_value=-1e6, max_value=1e6))
    @settings(max_examples=100, deadline=None)
    def test_range_and_idempotence(self, theta):
        w = float(wrap_angle(theta))
        assert -math.pi < w <= math.pi + 1e-9
        assert wrap_angle(w) == pytest.approx(w, abs=1e-9)
        assert math.isclose(math.cos(w), math.cos(theta), abs_tol=1e-6)


class TestBuildDataset:
    def test_uniform_motion(self):
        ds = ml.build_dataset([traj_1d([0.0, 0.1, 0.2])])
        assert len(ds) == 1
        s = ds.sample(0)
        assert s.x == pytest.approx([0.1])
        assert s.v == pytest.approx([1.0])
        assert s.a == pytest.approx([0.0])
        assert (s.traj_id, s.step) == (0, 1)

    def test_rest(self):
        ds = ml.build_dataset([traj_1d([0.0, 0.0, 0.0])])
        assert ds.sample(0).v == pytest.approx([0.0])
        assert ds.sample(0).a == pytest.approx([0.0])

    def test_sample_counts(self, gravity_trajs, gravity_dataset):
        assert len(gravity_dataset) == sum(len(t) - 2 for t in gravity_trajs)
        for (start, end), traj in zip(gravity_dataset.boundaries, gravity_trajs):
            assert end - start == len(traj) - 2

    def test_discrete_force_is_not_the_continuum_force(self, gravity_dataset):
        # a + sin(x) is small but nonzero: the dt^2 fingerprint of eq-of-motion
        ds = gravity_dataset
        gap = np.max(np.abs(ds.a[:, 0] + np.sin(ds.x[:, 0])))
        assert 0.0 < gap < ds.dt**2

    def test_short_trajectory_skipped_with_count(self):
        good = traj_1d([0.0, 0.1, 0.2, 0.3])
        ds = ml.build_dataset([good], wrap=None)
        assert ds.n_skipped == 0
        # a 2-point series cannot even be constructed as a Trajectory,
        # so the skip path is driven through build_dataset's own guard
        with pytest.raises(InvalidInputError):
            traj_1d([0.0, 0.1])

    def test_mixed_dt_rejected(self):
        with pytest.raises(InvalidInputError):
            ml.build_dataset([traj_1d([0, 1, 2], dt=0.1), traj_1d([0, 1, 2], dt=0.2)])

    def test_mixed_dim_rejected(self):
        t2 = ml.Trajectory(dt=0.1, states=np.zeros((4, 2)))
        with pytest.raises(InvalidInputError):
            ml.build_dataset([traj_1d([0, 1, 2]), t2])

    def test_stencil_reconstructs_source(self, gravity_trajs):
        # unwrapped coordinates: x_{n+1} = 2 x_n - x_{n-1} + dt^2 a_n exactly
        ds = ml.build_dataset(gravity_trajs, wrap=[False])
        traj = gravity_trajs[0]
        start, end = ds.boundaries[0]
        rebuilt = 2 * ds.x[start:end, 0] - traj.states[:-2, 0] + ds.dt**2 * ds.a[start:end, 0]
        assert np.allclose(rebuilt, traj.states[2:, 0], rtol=0, atol=1e-12)

    def test_wrapped_differences_stay_smooth_across_cut(self):
        # rotating motion passes the branch cut; wrapped v must stay near the
        # true angular velocity instead of jumping by 2 pi / dt
        dt = 0.1
        angles = 3.0 * np.arange(100) * dt  # rotation at rate 3
        ds = ml.build_dataset([traj_1d(angles, dt=dt)], wrap=[True])
        assert np.allclose(ds.v, 3.0, atol=1e-9)
        assert np.allclose(ds.a, 0.0, atol=1e-9)
        assert np.all(ds.x <= math.pi) and np.all(ds.x > -math.pi)

    def test_wrap_flag_shape_checked(self):
        with pytest.raises(InvalidInputError):
            ml.build_dataset([traj_1d([0, 1, 2])], wrap=[True, False])


class TestScaler:
    def test_symmetric_range(self):
        ds = ml.build_dataset([traj_1d([-2.0, 0.0, 2.0, 0.0, -2.0])])
        sc = ds.scaler
        assert sc.offset_x[0] == pytest.approx(0.0)
        assert sc.gain_x[0] == pytest.approx(0.5)

    def test_shifted_range(self):
        ds = ml.build_dataset([traj_1d([1.0, 2.0, 3.0, 2.0, 1.0])])
        sc = ds.scaler
        assert sc.offset_x[0] == pytest.approx(-2.0)
        assert sc.gain_x[0] == pytest.approx(1.0)

    def test_degenerate_dimension_maps_to_zero(self):
        ds = ml.build_dataset([traj_1d([0.7, 0.7, 0.7, 0.7])])
        xs, vs = ds.scaler.transform(ds.x, ds.v)
        assert np.all(xs == 0.0)
        assert ds.scaler.gain_x[0] == 0.0
        x_back, _ = ds.scaler.inverse(xs, vs)
        assert np.all(x_back == 0.7)

    def test_training_set_lands_in_unit_box(self, gravity_dataset):
        xs, vs = gravity_dataset.scaler.transform(gravity_dataset.x, gravity_dataset.v)
        assert xs.min() >= -1.0 - 1e-12 and xs.max() <= 1.0 + 1e-12
        assert vs.min() >= -1.0 - 1e-12 and vs.max() <= 1.0 + 1e-12
        assert xs.max() == pytest.approx(1.0) and xs.min() == pytest.approx(-1.0)

    @given(st.floats(-10, 10), st.floats(-10, 10))
    @settings(max_examples=50, deadline=None)
    def test_round_trip(self, x, v):
        ds = ml.build_dataset([traj_1d([-3.0, 0.0, 3.0, 0.0])])
        xs, vs = ds.scaler.transform([x], [v])
        x_back, v_back = ds.scaler.inverse(xs, vs)
        assert x_back[0] == pytest.approx(x, abs=1e-12, rel=1e-12)
        assert v_back[0] == pytest.approx(v, abs=1e-12, rel=1e-12)

    def test_refit_matches_stored(self, gravity_dataset):
        sc = ml.fit_scaler(gravity_dataset)
        assert np.array_equal(sc.offset_x, gravity_dataset.scaler.offset_x)
        assert np.array_equal(sc.gain_v, gravity_dataset.scaler.gain_v)


class TestCsv:
    def test_dataset_csv_header_and_rows(self, tmp_path):
        ds = ml.build_dataset([traj_1d([0.0, 0.1, 0.2, 0.3])])
        path = tmp_path / "ds.csv"
        save_dataset_csv(ds, path, meta={"config_hash": "abc"})
        lines = path.read_text().splitlines()
        assert lines[0] == "# config_hash=abc"
        assert lines[1] == "traj,n,x1,v1,a1"
        assert len(lines) == 2 + len(ds)

    def test_trajectory_csv_round_trip(self, tmp_path):
        traj = ml.integrate(ml.harmonic(1.0), [0.0], [1.0], 2.0, 0.1, label="h")
        path = tmp_path / "t.csv"
        ml.save_trajectory_csv(traj, path, meta={"config_hash": "deadbeef"})
        back = ml.load_trajectory_csv(path)
        assert back.dt == pytest.approx(traj.dt)
        assert np.allclose(back.states, traj.states, rtol=0, atol=0)
        first = path.read_text().splitlines()
        assert first[0] == "# config_hash=deadbeef"
        assert first[1] == "t,x1"
