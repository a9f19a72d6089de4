import json
import logging
import math
import platform
from pathlib import Path
from typing import Any, Dict

import tomli
import tomli_w
from nanoid import generate
from rich.logging import RichHandler

from masersync import defaults


def generate_random(size=10, strategy="nanoid",
                    alphabet=defaults.NANO_RUN_ALPHABET) -> str:
    """Default URLSafe id"""
    if strategy == "nanoid":
        return generate(alphabet=alphabet, size=size)
    raise NotImplementedError("Strategy %s not implemented", strategy)


def mkdir_p(fp):
    """Make the fullpath
    similar to mkdir -p in unix systems.
    """
    Path(fp).mkdir(parents=True, exist_ok=True)


def write_toml(fpath, data: Dict[Any, Any]):
    with open(fpath, "wb") as f:
        tomli_w.dump(data, f)


def read_toml(fpath) -> Dict[Any, Any]:
    with open(fpath, "r") as f:
        data = tomli.loads(f.read())
        return data


def read_config_file(fpath) -> Dict[Any, Any]:
    """ json, or toml when the suffix says so """
    if Path(fpath).suffix == ".toml":
        return read_toml(fpath)
    with open(fpath, "r") as f:
        return json.load(f)


def fmt_float(value, digits=defaults.CSV_DIGITS) -> str:
    """ locale independent, empty for missing or non-finite values """
    if value is None:
        return ""
    value = float(value)
    if not math.isfinite(value):
        return ""
    return format(value, f".{digits}g")


def versions() -> Dict[str, str]:
    import matplotlib
    import numpy
    import scipy

    from masersync import __version__

    return {
        "masersync": __version__,
        "python": platform.python_version(),
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "matplotlib": matplotlib.__version__,
    }


def setup_logging(verbosity: int = 0):
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(message)s", datefmt="[%X]",
                        handlers=[RichHandler(rich_tracebacks=True)],
                        force=True)
