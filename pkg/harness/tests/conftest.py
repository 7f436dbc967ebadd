import pytest


@pytest.fixture
def tiny_config_kwargs():
    return dict(max_seq_len=48, epochs=1, learning_rate=5e-4, batch_size=8,
                seed=0, hidden_size=32, num_layers=1, num_heads=2)
