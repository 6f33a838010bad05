import math

import pytest
from hypothesis import given, settings, strategies as st

from treesearch.envs import (CartPoleDet, Chain, FrozenLakeDet, LoopyChain, Metric, make_env, restore,
                             snapshot, state_distance)
from treesearch.oracle import solve

ALL_ENVS = [Chain(10), LoopyChain(10), FrozenLakeDet(), CartPoleDet()]


def test_resets():
    assert Chain(10).reset() == (0,)
    assert LoopyChain(10).reset() == (1,)
    cp = CartPoleDet()
    assert cp.reset(7) == cp.reset(7)
    assert cp.reset(7) != cp.reset(8)
    assert all(abs(x) <= 0.02 for x in cp.reset(3))


def test_chain_steps():
    env = Chain(10)
    fwd = env.forward_action(9)
    assert env.step((9,), fwd) == ((10,), 1.0, True)
    nxt, r, done = env.step((9,), 1 - fwd)
    assert (r, done) == (0.0, True)
    nxt, r, done = env.step((3,), env.forward_action(3))
    assert (nxt, r, done) == ((4,), 0.0, False)


def test_chain_forward_map_is_seeded():
    a = [Chain(40, seed=0).forward_action(i) for i in range(40)]
    b = [Chain(40, seed=1).forward_action(i) for i in range(40)]
    assert a != b
    assert set(a) == {0, 1}
    assert all(Chain(5, seed=None).forward_action(i) == 0 for i in range(5))


def test_loopy_chain_wrong_action_returns_to_start():
    env = LoopyChain(10)
    nxt, r, done = env.step((5,), 1 - env.forward_action(5))
    assert (nxt, r, done) == ((1,), 0.0, False)
    for i in range(1, 11):
        nxt, _, _ = env.step((i,), 1 - env.forward_action(i))
        assert env.distance(nxt, env.reset()) == 0
    assert env.step((10,), env.forward_action(10)) == ((11,), 1.0, True)


def test_frozenlake_moves():
    env = FrozenLakeDet()
    assert env.reset() == (0, 0)
    assert env.step((0, 0), 0) == ((0, 0), 0.0, False)   # wall
    assert env.step((0, 0), 1) == ((1, 0), 0.0, False)
    assert env.step((1, 0), 2) == ((1, 1), 0.0, True)    # hole
    assert env.step((3, 2), 2) == ((3, 3), 1.0, True)    # goal


def test_cartpole_surviving_step_reward():
    env = CartPoleDet()
    _, r, done = env.step(env.reset(0), 1)
    assert r == 0.005 and not done


def test_cartpole_constant_policy_fails():
    env = CartPoleDet()
    for action in (0, 1):
        state = env.reset(0)
        for t in range(400):
            state, r, done = env.step(state, action)
            if done:
                break
        assert done and r == -1.0


@pytest.mark.parametrize("env", ALL_ENVS, ids=lambda e: e.name)
def test_purity_and_reward_bound(env):
    state = env.reset(5)
    for t in range(60):
        a = t % env.spec.action_count
        first = env.step(state, a)
        assert env.step(state, a) == first
        assert abs(first.reward) <= env.spec.reward_bound
        if first.terminal:
            break
        state = first.next_state


@pytest.mark.parametrize("env", ALL_ENVS, ids=lambda e: e.name)
def test_snapshot_round_trip(env):
    state = env.reset(1)
    assert restore(env, snapshot(env, state)) == state


def _play(env, state, actions):
    out = []
    for a in actions:
        res = env.step(state, a)
        out.append(res)
        if res.terminal:
            break
        state = res.next_state
    return out


def test_cartpole_replay_is_bit_exact():
    env = CartPoleDet(theta_limit=1e9, x_limit=1e9)
    start = snapshot(env, env.reset(11))
    actions = [(t * 7) % 3 % 2 for t in range(400)]
    assert _play(env, restore(env, start), actions) == _play(env, env.reset(11), actions)


def test_chain_replay():
    env = Chain(12)
    actions = [env.forward_action(i) for i in range(12)]
    assert _play(env, env.reset(), actions) == _play(env, restore(env, snapshot(env, (0,))), actions)


def test_terminal_step_rejected():
    with pytest.raises(ValueError):
        Chain(3).step((3,), 0)
    with pytest.raises(ValueError):
        FrozenLakeDet().step((1, 1), 0)


def test_distance():
    assert state_distance((3,), (3,)) == 0
    assert Chain(5).distance((3,), (4,)) == 1
    cp = CartPoleDet()
    assert cp.distance((0.1, 0.0, 0.0, 0.0), (0.1, 0.0, 1e-7, 0.0)) == pytest.approx(1e-7, rel=1e-9)
    assert state_distance((0, 0), (3, 4), Metric.L2) == 5.0
    with pytest.raises(ValueError):
        state_distance((0,), (0, 1))


@pytest.mark.parametrize("n", range(1, 13))
def test_chain_trace_count_and_optimality(n):
    res = solve(Chain(n), (0,), 2 * n)
    assert res.expanded_traces == n + 1
    assert res.optimal_value == 1.0
    assert res.optimal_actions == {Chain(n).forward_action(0)}


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 10), st.lists(st.integers(0, 1), min_size=1, max_size=12))
def test_only_all_forward_pays(n, actions):
    env = Chain(n)
    total, state = 0.0, env.reset()
    for a in actions:
        state, r, done = env.step(state, a)
        total += r
        if done:
            break
    all_forward = all(a == env.forward_action(i) for i, a in enumerate(actions[:n]))
    assert total == (1.0 if all_forward and len(actions) >= n else 0.0)


def test_make_env():
    assert make_env("chain", 7).spec.horizon == 14
    assert make_env("loopy-chain", 7).spec.horizon == 14
    assert make_env("frozenlake").spec.horizon == 400
    assert make_env("cartpole").spec.action_count == 2
    with pytest.raises(ValueError):
        make_env("pong")
