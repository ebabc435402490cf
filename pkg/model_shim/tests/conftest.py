from __future__ import annotations

import pytest
import transformers

transformers.logging.set_verbosity_error()
transformers.logging.disable_progress_bar()

from model_shim.checkpoint import build_checkpoint  # noqa: E402


@pytest.fixture(scope="session")
def checkpoint(tmp_path_factory) -> str:
    out = tmp_path_factory.mktemp("ckpt")
    build_checkpoint(out, seed=0)
    return str(out)
