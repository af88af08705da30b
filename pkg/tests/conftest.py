import pytest

from xbar_fanin import NeuronConfig, ReadPulse, default_devices

C_REF = 864.5e-15


@pytest.fixture
def ref_neuron():
    return NeuronConfig(c_mem=C_REF, v_dd=1.8, v_th=0.9)


@pytest.fixture
def ref_pulse():
    return ReadPulse(amplitude=0.1, width=1e-6)


@pytest.fixture
def devices():
    return default_devices()
