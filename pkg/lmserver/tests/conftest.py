import pytest

from lmserver.training import train_toy

from toycorpus import SMALL_CONFIG, cycle_corpus


@pytest.fixture(scope="session")
def cycle_result():
    return train_toy(cycle_corpus(300, seed=5), SMALL_CONFIG)
