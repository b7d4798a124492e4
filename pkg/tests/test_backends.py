import os
import subprocess
import sys

import numpy as np
import pytest

from sepsim import _backend, _pycore
from sepsim.dynamics import DynamicsParams, simulate, trajectory_rng

pytestmark = pytest.mark.skipif(not _backend.COMPILED_AVAILABLE, reason="compiled core not built")


@pytest.fixture
def cores():
    return _backend.get_backend("compiled"), _pycore


SEED_STATE = [0x0123456789ABCDEF, 0xFEDCBA9876543210, 0x0F1E2D3C4B5A6978, 0x1122334455667788]


class TestRng:
    def test_stream_identical(self, cores):
        c, p = cores
        a, b = c.Rng(SEED_STATE), p.Rng(SEED_STATE)
        for _ in range(500):
            assert a.next_u64() == b.next_u64()
        for n in (1, 2, 3, 7, 1000, 2 ** 32 - 1):
            assert [a.below(n) for _ in range(50)] == [b.below(n) for _ in range(50)]
        assert [a.bit() for _ in range(200)] == [b.bit() for _ in range(200)]
        assert [a.uniform() for _ in range(50)] == [b.uniform() for _ in range(50)]
        assert a.state() == b.state()

    def test_reference_vector(self, cores):
        # xoshiro256** from state (1, 2, 3, 4): first outputs of the reference C code
        for mod in cores:
            r = mod.Rng([1, 2, 3, 4])
            assert [r.next_u64() for _ in range(3)] == [11520, 0, 1509978240]

    def test_below_domain(self, cores):
        for mod in cores:
            r = mod.Rng(SEED_STATE)
            for n in (0, 2 ** 32):
                with pytest.raises(ValueError):
                    r.below(n)

    def test_zero_state_rejected(self, cores):
        for mod in cores:
            with pytest.raises(ValueError):
                mod.Rng([0, 0, 0, 0])

    def test_uniform_range(self, cores):
        for mod in cores:
            r = mod.Rng(SEED_STATE)
            u = np.array([r.uniform() for _ in range(2000)])
            assert u.min() >= 0.0 and u.max() < 1.0

    def test_copy_independent(self, cores):
        for mod in cores:
            r = mod.Rng(SEED_STATE)
            r.next_u64()
            q = r.copy()
            assert [r.next_u64() for _ in range(5)] == [q.next_u64() for _ in range(5)]


def _graph_snapshot(core):
    i, j, a = core.edges()
    return i.tolist(), j.tolist(), a.tolist(), core.get_w().tolist(), core.degrees().tolist()


class TestGraphCore:
    @pytest.mark.parametrize("mode", [0, 1, 2])
    @pytest.mark.parametrize("interleave", [False, True])
    def test_run_identical(self, cores, mode, interleave):
        c, p = cores
        uniform = mode == 1
        gc, gp = c.GraphCore(40, mode), p.GraphCore(40, mode)
        rc, rp = c.Rng(SEED_STATE), p.Rng(SEED_STATE)
        for _ in range(5):
            gc.run(20, 3, 4, interleave, uniform, rc)
            gp.run(20, 3, 4, interleave, uniform, rp)
            assert _graph_snapshot(gc) == _graph_snapshot(gp)
        assert rc.state() == rp.state()
        np.testing.assert_array_equal(gc.component_sizes(), gp.component_sizes())

    def test_manual_ops_identical(self, cores, rng):
        c, p = cores
        gc, gp = c.GraphCore(12, 1), p.GraphCore(12, 1)
        for _ in range(300):
            if rng.random() < 0.7:
                i, j = (int(v) for v in rng.choice(12, 2, replace=False))
                a = float(rng.uniform(-7, 7))
                gc.gate(i, j, a)
                gp.gate(i, j, a)
            else:
                k, s = int(rng.integers(12)), int(rng.integers(2))
                gc.measure_reset(k, s)
                gp.measure_reset(k, s)
        assert _graph_snapshot(gc) == _graph_snapshot(gp)
        for k in range(12):
            assert gc.neighbors(k) == gp.neighbors(k)

    def test_reduce_angle(self, cores):
        c, p = cores
        for a in (0.0, -1e-12, 2 * np.pi - 1e-12, 7.5, -3.0, 4 * np.pi):
            assert c.reduce_angle(a) == p.reduce_angle(a)

    def test_too_small_for_dynamics(self, cores):
        for mod in cores:
            with pytest.raises(ValueError):
                mod.GraphCore(1, 0).run(1, 1, 1, False, False, mod.Rng(SEED_STATE))


class TestGf2Rank:
    def test_random_matrices(self, cores, rng):
        c, p = cores
        for _ in range(60):
            r, k = (int(v) for v in rng.integers(1, 90, size=2))
            m = (rng.random((r, k)) < rng.uniform(0.05, 0.6)).astype(np.uint8)
            assert c.gf2_rank(m) == p.gf2_rank(m)

    def test_known(self, cores):
        m = np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
        for mod in cores:
            assert mod.gf2_rank(m) == 2
            assert mod.gf2_rank(np.eye(70, dtype=np.uint8)) == 70
            assert mod.gf2_rank(np.zeros((3, 0), dtype=np.uint8)) == 0


class TestTableauCore:
    def test_random_clifford_identical(self, cores, rng):
        c, p = cores
        n = 9
        tc, tp = c.TableauCore(n), p.TableauCore(n)
        rc, rp = c.Rng(SEED_STATE), p.Rng(SEED_STATE)
        for _ in range(400):
            op = int(rng.integers(4))
            q = int(rng.integers(n))
            if op == 0:
                tc.h(q)
                tp.h(q)
            elif op == 1:
                tc.s(q)
                tp.s(q)
            elif op == 2:
                b = (q + 1 + int(rng.integers(n - 1))) % n
                tc.cz(q, b)
                tp.cz(q, b)
            else:
                ax = int(rng.integers(3))
                assert tc.measure(q, ax, rc) == tp.measure(q, ax, rp)
        for x, y in zip(tc.arrays(), tp.arrays()):
            np.testing.assert_array_equal(np.asarray(x), np.asarray(y))
        cols = [0, 3, 4, 8]
        assert tc.subsystem_rank(cols) == tp.subsystem_rank(cols)

    def test_forced_outcome(self, cores):
        for mod in cores:
            t = mod.TableauCore(1)
            t.h(0)
            assert mod.TableauCore(1).measure(0, 2, None) == (0, True)
            assert t.measure(0, 2, None, 1) == (1, False)
            assert t.measure(0, 2, None) == (1, True)


class TestSelection:
    def test_get_backend(self):
        assert _backend.get_backend("python") is _pycore
        assert _backend.get_backend("compiled").BACKEND == "compiled"
        with pytest.raises(ValueError):
            _backend.get_backend("fortran")

    def test_simulation_bitwise_equal(self):
        p = DynamicsParams.from_g(0.7, master_seed=11, burn_in_timesteps=60)
        _, a, _ = simulate(80, p, 3, backend="compiled")
        _, b, _ = simulate(80, p, 3, backend="python")
        assert a.edges() == b.edges()
        np.testing.assert_array_equal(a.w, b.w)

    def test_trajectory_rng_equal(self):
        a = trajectory_rng(5, 2, "compiled")
        b = trajectory_rng(5, 2, "python")
        assert a.state() == b.state()

    def test_env_forces_fallback(self):
        env = dict(os.environ, SEPSIM_PURE_PYTHON="1")
        code = "from sepsim._backend import get_backend; print(get_backend().BACKEND)"
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        assert out.stdout.strip() == "python"


def test_benchmark_script_runs(capsys):
    import runpy

    path = os.path.join(os.path.dirname(__file__), "..", "benchmarks", "bench_backends.py")
    mod = runpy.run_path(path)
    mod["main"](["--n", "60", "--repeat", "1"])
    out = capsys.readouterr().out
    assert "dynamics" in out and "speedup" in out
