import numpy as np
import pytest

from slithernav.config import RunConfig
from slithernav.trainer import sigma_schedule, train


def tiny_config():
    return RunConfig.defaults(**{
        "rl.episode_seconds": 8.0,
        "rl.arena_size": 2.0,
        "rl.batch_size": 8,
        "rl.sigma_decay_episodes": 4,
        "rl.hidden": 32,
        "cpg.omega_scale": 31.41592653589793,
    })


def test_sigma_schedule_linear_decay():
    assert sigma_schedule(0.2, 0, 100) == pytest.approx(0.2)
    assert sigma_schedule(0.2, 50, 100) == pytest.approx(0.1)
    assert sigma_schedule(0.2, 100, 100) == 0.0
    assert sigma_schedule(0.2, 150, 100) == 0.0


def test_train_writes_artifacts(tmp_path):
    cfg = tiny_config()
    agent, results = train(cfg, tmp_path / "run", seed=5, episodes=4)
    assert (tmp_path / "run" / "checkpoint.ckpt").exists()
    assert (tmp_path / "run" / "config.snapshot").exists()
    lines = (tmp_path / "run" / "rewards.csv").read_text().splitlines()
    assert lines[0] == "episode,return,steps,seed"
    assert len(lines) == 5
    assert len(results) == 4
    assert all(r.steps == 4 for r in results)  # 8 s / 2 s decisions
    # snapshot reparses to the same values
    snap = RunConfig.load(tmp_path / "run" / "config.snapshot")
    assert snap.values == cfg.values


def test_train_deterministic_single_thread(tmp_path):
    cfg = tiny_config()
    _, res1 = train(cfg, tmp_path / "a", seed=9, episodes=3)
    _, res2 = train(cfg, tmp_path / "b", seed=9, episodes=3)
    assert [r.ret for r in res1] == [r.ret for r in res2]
    assert (tmp_path / "a" / "rewards.csv").read_bytes() == (tmp_path / "b" / "rewards.csv").read_bytes()


def test_train_checkpoint_reloads(tmp_path):
    from slithernav.ddpg import load_checkpoint

    cfg = tiny_config()
    agent, _ = train(cfg, tmp_path / "run", seed=2, episodes=3)
    loaded = load_checkpoint(tmp_path / "run" / "checkpoint.ckpt")
    obs = np.linspace(-1, 1, 21)
    assert np.array_equal(loaded.act(obs), agent.act(obs))


@pytest.mark.slow
def test_train_threaded_collection(tmp_path):
    cfg = tiny_config()
    agent, results = train(cfg, tmp_path / "run", seed=4, episodes=6, workers=2)
    assert len(results) == 6
    assert sorted(r.episode for r in results) == list(range(6))
    assert (tmp_path / "run" / "checkpoint.ckpt").exists()
