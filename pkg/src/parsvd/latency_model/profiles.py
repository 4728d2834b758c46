"""Hardware operator profiles: per-operation latency and LUT cost.

Builtin profiles hold measured figures for fully combinational 32-bit
floating-point and fixed-point operator IPs on a Zynq UltraScale device.
Custom profiles load from a flat key-value text file.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from ..errors import ProfileError

OP_KINDS = ("add", "mul", "div", "sqrt")


@dataclass(frozen=True)
class HardwareProfile:
    name: str
    latency_ns: dict
    lut: dict

    def __post_init__(self):
        for table, unit in ((self.latency_ns, "ns"), (self.lut, "lut")):
            for kind in OP_KINDS:
                if kind not in table:
                    raise ProfileError(f"profile {self.name!r} missing {kind}.{unit}")
                if not table[kind] > 0:
                    raise ProfileError(
                        f"profile {self.name!r}: {kind}.{unit} must be positive, "
                        f"got {table[kind]!r}"
                    )


BUILTIN_PROFILES = {
    "zynq-fp32": HardwareProfile(
        name="zynq-fp32",
        latency_ns={"add": 14.910, "mul": 14.059, "div": 33.296, "sqrt": 26.963},
        lut={"add": 341, "mul": 660, "div": 757, "sqrt": 409},
    ),
    "zynq-fxp32": HardwareProfile(
        name="zynq-fxp32",
        latency_ns={"add": 6.039, "mul": 14.708, "div": 46.486, "sqrt": 23.987},
        lut={"add": 32, "mul": 1074, "div": 1242, "sqrt": 352},
    ),
}


def _parse_profile_file(path: str) -> HardwareProfile:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" in line:
                key, _, val = line.partition("=")
            else:
                parts = line.split(None, 1)
                if len(parts) != 2:
                    raise ProfileError(f"{path}:{lineno}: expected 'key value', got {raw.strip()!r}")
                key, val = parts
            key = key.strip()
            val = val.strip()
            if key in values:
                raise ProfileError(f"{path}:{lineno}: duplicate key {key!r}")
            values[key] = val

    name = values.pop("name", os.path.splitext(os.path.basename(path))[0])
    latency: dict[str, float] = {}
    lut: dict[str, int] = {}
    for kind in OP_KINDS:
        for suffix, table, conv in ((f"{kind}.ns", latency, float), (f"{kind}.lut", lut, int)):
            if suffix not in values:
                raise ProfileError(f"{path}: missing key {suffix!r}")
            try:
                table[kind] = conv(values.pop(suffix))
            except ValueError as exc:
                raise ProfileError(f"{path}: key {suffix!r}: {exc}") from exc
    if values:
        extra = ", ".join(sorted(values))
        raise ProfileError(f"{path}: unknown keys: {extra}")
    return HardwareProfile(name=name, latency_ns=latency, lut=lut)


def load_profile(source: str, search_dirs: list[str] | None = None) -> HardwareProfile:
    """Resolve a builtin profile name or load a profile file.

    File lookup order: the literal path, then each directory in
    ``search_dirs``, then the PARSVD_PROFILE_DIR environment variable.
    """
    if source in BUILTIN_PROFILES:
        return BUILTIN_PROFILES[source]
    candidates = [source]
    dirs = list(search_dirs or [])
    env_dir = os.environ.get("PARSVD_PROFILE_DIR")
    if env_dir:
        dirs.append(env_dir)
    for d in dirs:
        candidates.append(os.path.join(d, source))
    for cand in candidates:
        if os.path.isfile(cand):
            return _parse_profile_file(cand)
    builtin_names = ", ".join(sorted(BUILTIN_PROFILES))
    raise ProfileError(
        f"unknown profile {source!r}: not a builtin ({builtin_names}) and no such file"
    )
