import pytest
from hypothesis import given
from hypothesis import strategies as st

from voiceroute.command import CommandVocabulary, DeviceCommand
from voiceroute.execution import (
    DeviceDriver,
    DeviceRegistry,
    ExecStatus,
    Power,
    device_state,
    execute,
)


@pytest.fixture
def registry(vocab):
    return DeviceRegistry.from_vocab(vocab)


def test_registry_matches_vocab(vocab, registry):
    assert sorted(registry.keys()) == [("light", 1), ("light", 2), ("speaker", 1)]


def test_turn_on_from_off(registry):
    res = execute(registry, DeviceCommand("turn_on", "light", 1))
    assert res.status is ExecStatus.EXECUTED and res.state_after.power is Power.ON


def test_idempotent(registry):
    first = execute(registry, DeviceCommand("turn_on", "light", 1))
    second = execute(registry, DeviceCommand("turn_on", "light", 1))
    assert second.status is ExecStatus.EXECUTED and second.state_after.power is Power.ON
    assert second.state_after.last_changed_at == first.state_after.last_changed_at


def test_unregistered_index_rejected(registry):
    res = execute(registry, DeviceCommand("turn_on", "light", 5))
    assert res.status is ExecStatus.REJECTED and res.state_after is None


def test_incomplete_rejected(registry):
    assert execute(registry, DeviceCommand("turn_on", "light", None)).status is ExecStatus.REJECTED


def test_device_state(registry):
    execute(registry, DeviceCommand("turn_on", "light", 1))
    assert device_state(registry, "light", 1).power is Power.ON
    assert device_state(registry, "light", 2).power is Power.OFF
    with pytest.raises(KeyError):
        device_state(registry, "oven", 1)


class Broken(DeviceDriver):
    def apply(self, action):
        raise IOError("usb disconnected")


def test_driver_error_changes_nothing(registry):
    registry.devices[("light", 2)] = Broken()
    res = execute(registry, DeviceCommand("turn_on", "light", 2))
    assert res.status is ExecStatus.DRIVER_ERROR and "usb" in res.detail
    assert device_state(registry, "light", 1).power is Power.OFF


def test_unknown_action_is_driver_error(registry):
    assert execute(registry, DeviceCommand("dim", "light", 1)).status is ExecStatus.DRIVER_ERROR


def test_only_sim_driver():
    with pytest.raises(ValueError):
        DeviceRegistry.from_vocab(CommandVocabulary(), driver="usb")


command_seqs = st.lists(
    st.builds(
        DeviceCommand,
        st.sampled_from(["turn_on", "turn_off"]),
        st.sampled_from(["light", "speaker", "oven"]),
        st.integers(0, 3),
    ),
    max_size=40,
)


def fold_oracle(vocab, cmds):
    """Replay the sequence by hand: last valid action per device wins."""
    state = {(d, i): "Off" for d, n in vocab.devices.items() for i in range(1, n + 1)}
    for c in cmds:
        if (c.device, c.index) in state:
            state[(c.device, c.index)] = "On" if c.action == "turn_on" else "Off"
    return state


@given(command_seqs)
def test_state_machine_matches_fold(cmds):
    vocab = CommandVocabulary()
    registry = DeviceRegistry.from_vocab(vocab)
    for c in cmds:
        before = {k: d.state.power for k, d in registry.devices.items()}
        res = execute(registry, c)
        after = {k: d.state.power for k, d in registry.devices.items()}
        changed = {k for k in before if before[k] != after[k]}
        # no cross-talk; rejections mutate nothing
        assert changed <= {(c.device, c.index)}
        if res.status is not ExecStatus.EXECUTED:
            assert not changed
    expected = fold_oracle(vocab, cmds)
    assert {k: d.state.power.value for k, d in registry.devices.items()} == expected
