"""Scenario config parsing and validation.

Configs are JSON objects with a version, an optional seed, optional output
settings, and exactly one command body (fbl, goodput, compare, budget, rsc,
urcl, urcs). Every rejection names the offending key path and the violated
constraint. SNR is written in dB in configs (gamma_db, mean_snr_db, inr_db)
and converted to linear units once, at this boundary.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Optional

from .errors import ConfigError

SUPPORTED_VERSIONS = ("1",)
BODY_KINDS = ("fbl", "goodput", "compare", "budget", "rsc", "urcl", "urcs")
OUTPUT_FORMATS = ("json", "csv")

DEFAULT_SEED = 0  # documented default: every run is seeded, 0 unless given


@dataclass(frozen=True)
class OutputSpec:
    format: str = "json"
    path: Optional[str] = None


@dataclass(frozen=True)
class ScenarioConfig:
    version: str
    seed: int
    body_kind: str
    body: dict
    output: OutputSpec

    def with_overrides(self, seed=None, output_path=None, output_format=None):
        cfg = self
        if seed is not None:
            cfg = replace(cfg, seed=int(seed))
        out = cfg.output
        if output_path is not None:
            out = replace(out, path=output_path)
        if output_format is not None:
            out = replace(out, format=output_format)
        return replace(cfg, output=out)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


class _Node:
    """Validation cursor over one dict, tracking the key path for messages."""

    def __init__(self, data: dict, path: str):
        if not isinstance(data, dict):
            raise ConfigError(path, f"must be an object, got {type(data).__name__}")
        self.data = data
        self.path = path
        self.seen = set()

    def child(self, key):
        return _Node(self.data[key], f"{self.path}.{key}" if self.path else key)

    def key_path(self, key):
        return f"{self.path}.{key}" if self.path else key

    def require(self, key, types, check=None, constraint=""):
        if key not in self.data:
            raise ConfigError(self.key_path(key), "required key is missing")
        return self.get(key, types, check=check, constraint=constraint)

    def get(self, key, types, default=None, check=None, constraint=""):
        self.seen.add(key)
        if key not in self.data:
            return default
        val = self.data[key]
        if types is float and isinstance(val, int) and not isinstance(val, bool):
            val = float(val)
        if types is int and isinstance(val, bool):
            raise ConfigError(self.key_path(key), "must be an integer, got a boolean")
        if not isinstance(val, types if isinstance(types, tuple) else (types,)):
            tn = types.__name__ if not isinstance(types, tuple) else "/".join(
                t.__name__ for t in types
            )
            raise ConfigError(
                self.key_path(key), f"must be of type {tn}, got {type(val).__name__}"
            )
        if check is not None and not check(val):
            raise ConfigError(self.key_path(key), f"must satisfy {constraint}, got {val!r}")
        return val

    def reject_unknown(self):
        unknown = set(self.data) - self.seen
        if unknown:
            key = sorted(unknown)[0]
            raise ConfigError(self.key_path(key), "unknown key")


def _prob_open(v):
    return 0.0 < v < 1.0


def _positive(v):
    return v > 0 and math.isfinite(v)


def _non_negative(v):
    return v >= 0 and math.isfinite(v)


def _validate_fbl(node: _Node):
    n = node.get("n", int, check=lambda v: v >= 1, constraint="n >= 1")
    k = node.get("k_bits", float, check=_positive, constraint="k_bits > 0")
    eps = node.get("epsilon", float, check=_prob_open, constraint="epsilon in (0,1)")
    gdb = node.get("gamma_db", float, check=math.isfinite, constraint="finite dB value")
    node.get("mode", str, default="complex", check=lambda v: v in ("complex", "real"),
             constraint="mode in {complex, real}")
    node.reject_unknown()
    given = [name for name, v in [("n", n), ("k_bits", k), ("epsilon", eps), ("gamma_db", gdb)]
             if v is not None]
    if len(given) != 3:
        raise ConfigError(
            node.path or "fbl",
            "exactly three of {n, k_bits, epsilon, gamma_db} must be given "
            f"(the fourth is solved for); got {given}",
        )


def _validate_goodput(node: _Node):
    node.require("header_bits", float, check=_non_negative, constraint="header_bits >= 0")
    node.require("data_bits", float, check=_positive, constraint="data_bits > 0")
    node.require("header_cu", int, check=lambda v: v >= 0, constraint="header_cu >= 0")
    node.require("data_cu", int, check=lambda v: v >= 1, constraint="data_cu >= 1")
    node.require("symbol_period_s", float, check=_positive, constraint="symbol_period_s > 0")
    enc = node.require("encoding", str, check=lambda v: v in ("separate", "joint"),
                       constraint="encoding in {separate, joint}")
    gdb = node.get("gamma_db", float, check=math.isfinite, constraint="finite dB value")
    p_eh = node.get("p_eh", float, check=lambda v: 0 <= v <= 1, constraint="p_eh in [0,1]")
    p_ed = node.get("p_ed", float, check=lambda v: 0 <= v <= 1, constraint="p_ed in [0,1]")
    node.get("mode", str, default="complex", check=lambda v: v in ("complex", "real"),
             constraint="mode in {complex, real}")
    node.reject_unknown()
    if enc == "joint":
        if gdb is None:
            raise ConfigError(node.key_path("gamma_db"), "required for joint encoding")
        if p_eh is not None or p_ed is not None:
            raise ConfigError(node.path, "joint encoding takes gamma_db, not p_eh/p_ed")
    else:
        has_probs = p_eh is not None and p_ed is not None
        if has_probs == (gdb is not None):
            raise ConfigError(
                node.path,
                "separate encoding needs either gamma_db or both p_eh and p_ed (not both)",
            )


def _validate_compare(node: _Node):
    node.require("header_bits", float, check=_positive, constraint="header_bits > 0")
    node.require("data_bits", float, check=_positive, constraint="data_bits > 0")
    gdb = node.require("gamma_db", (int, float, list))
    total = node.require("total_cu", (int, list))
    node.get("symbol_period_s", float, default=1e-6, check=_positive,
             constraint="symbol_period_s > 0")
    node.get("header_cu", int, check=lambda v: v >= 1, constraint="header_cu >= 1")
    node.get("mode", str, default="complex", check=lambda v: v in ("complex", "real"),
             constraint="mode in {complex, real}")
    node.reject_unknown()
    for name, val in (("gamma_db", gdb), ("total_cu", total)):
        if isinstance(val, list):
            if not val:
                raise ConfigError(node.key_path(name), "grid list must not be empty")
            for i, x in enumerate(val):
                if not isinstance(x, (int, float)) or isinstance(x, bool):
                    raise ConfigError(f"{node.key_path(name)}[{i}]", "must be a number")
    if isinstance(total, list):
        for i, x in enumerate(total):
            if int(x) != x or x < 2:
                raise ConfigError(f"{node.key_path('total_cu')}[{i}]",
                                  "must be an integer >= 2")
    elif total < 2:
        raise ConfigError(node.key_path("total_cu"), "must be >= 2")


def _validate_budget(node: _Node):
    node.require("payload_bits", float, check=_positive, constraint="payload_bits > 0")
    node.require("epsilon", float, check=_prob_open, constraint="epsilon in (0,1)")
    node.require("gamma_db", float, check=math.isfinite, constraint="finite dB value")
    node.require("latency_s", float, check=_positive, constraint="latency_s > 0")
    node.get("max_bandwidth_hz", float, check=_positive, constraint="max_bandwidth_hz > 0")
    node.get("mode", str, default="complex", check=lambda v: v in ("complex", "real"),
             constraint="mode in {complex, real}")
    node.reject_unknown()


def _validate_channel(node: _Node):
    node.require("kind", str, check=lambda v: v in (
        "constant", "rayleigh-block", "lognormal-shadow", "rayleigh-plus-shadow"),
        constraint="kind in {constant, rayleigh-block, lognormal-shadow, rayleigh-plus-shadow}")
    node.require("mean_snr_db", float, check=math.isfinite, constraint="finite dB value")
    node.get("shadow_sigma_db", float, default=0.0, check=_non_negative,
             constraint="shadow_sigma_db >= 0")
    node.get("block_length", int, default=1, check=lambda v: v >= 1,
             constraint="block_length >= 1")
    if "interferer" in node.data:
        sub = node.child("interferer")
        node.seen.add("interferer")
        sub.require("activity_prob", float, check=lambda v: 0 <= v <= 1,
                    constraint="activity_prob in [0,1]")
        sub.require("inr_db", float, check=math.isfinite, constraint="finite dB value")
        sub.reject_unknown()
    node.reject_unknown()


def _validate_tier(node: _Node):
    node.require("name", str)
    node.require("payload_bits", float, check=_positive, constraint="payload_bits > 0")
    node.require("latency_s", float, check=_positive, constraint="latency_s > 0")
    node.require("reliability_target", float, check=_prob_open,
                 constraint="reliability_target in (0,1)")
    node.require("availability_target", float, check=_prob_open,
                 constraint="availability_target in (0,1)")
    node.require("rank", int, check=lambda v: v >= 0, constraint="rank >= 0")
    node.reject_unknown()


def _validate_rsc(node: _Node):
    node.require("system_bandwidth_hz", float, check=_positive,
                 constraint="system_bandwidth_hz > 0")
    tiers = node.require("tiers", list, check=lambda v: len(v) >= 1,
                         constraint="at least one tier")
    for i in range(len(tiers)):
        _validate_tier(_Node(tiers[i], f"{node.key_path('tiers')}[{i}]"))
    node.get("hysteresis_db", float, default=0.0, check=_non_negative,
             constraint="hysteresis_db >= 0")
    node.get("dwell_samples", int, default=1, check=lambda v: v >= 1,
             constraint="dwell_samples >= 1")
    node.seen.add("channel")
    if "channel" not in node.data:
        _raise_missing(node, "channel")
    _validate_channel(node.child("channel"))
    node.require("trace_length", int, check=lambda v: v >= 1, constraint="trace_length >= 1")
    node.require("sample_period_s", float, check=_positive, constraint="sample_period_s > 0")
    node.get("eval_seed", int, default=0)
    node.get("availability_window", int, check=lambda v: v >= 1,
             constraint="availability_window >= 1")
    node.get("mode", str, default="complex", check=lambda v: v in ("complex", "real"),
             constraint="mode in {complex, real}")
    node.reject_unknown()


def _raise_missing(node: _Node, key: str):
    raise ConfigError(node.key_path(key), "required key is missing")


def _validate_k_range(node: _Node):
    ks = node.require("k_range", list, check=lambda v: len(v) >= 1,
                      constraint="at least one user count")
    prev = 0
    for i, k in enumerate(ks):
        if not isinstance(k, int) or isinstance(k, bool) or k < 1:
            raise ConfigError(f"{node.key_path('k_range')}[{i}]", "must be an integer >= 1")
        if k <= prev:
            raise ConfigError(f"{node.key_path('k_range')}[{i}]",
                              "k_range must be strictly increasing")
        prev = k


def _validate_urcl(node: _Node):
    node.require("total_bandwidth_hz", float, check=_positive,
                 constraint="total_bandwidth_hz > 0")
    node.require("dedicated_user_cap", int, check=lambda v: v >= 1,
                 constraint="dedicated_user_cap >= 1")
    node.require("window_s", float, check=lambda v: v > 0.01,
                 constraint="window_s > 0.01 (long-horizon regime)")
    node.get("n_windows", int, default=200, check=lambda v: v >= 1, constraint="n_windows >= 1")
    node.get("samples_per_window", int, default=50, check=lambda v: v >= 1,
             constraint="samples_per_window >= 1")
    gdb = node.get("gamma_db", float, check=math.isfinite, constraint="finite dB value")
    has_channel = "channel" in node.data
    if has_channel:
        node.seen.add("channel")
        _validate_channel(node.child("channel"))
    if (gdb is None) == (not has_channel):
        raise ConfigError(node.path or "urcl",
                          "exactly one of gamma_db or channel must be given")
    guarantees = node.require("guarantees", list)
    for i in range(len(guarantees)):
        g = _Node(guarantees[i], f"{node.key_path('guarantees')}[{i}]")
        g.require("rate_bps", float, check=_non_negative, constraint="rate_bps >= 0")
        g.require("availability", float, check=_prob_open, constraint="availability in (0,1)")
        g.reject_unknown()
    _validate_k_range(node)
    node.reject_unknown()


def _validate_urcs(node: _Node):
    node.require("payload_bits", float, check=_positive, constraint="payload_bits > 0")
    node.get("basic_payload_bits", float, check=_positive, constraint="basic_payload_bits > 0")
    node.require("epsilon", float, check=_prob_open, constraint="epsilon in (0,1)")
    node.require("gamma_db", float, check=math.isfinite, constraint="finite dB value")
    node.require("latency_cap_s", float, check=_positive, constraint="latency_cap_s > 0")
    node.get("percentile", float, default=0.999, check=_prob_open,
             constraint="percentile in (0,1)")
    node.get("symbol_period_s", float, default=1e-6, check=_positive,
             constraint="symbol_period_s > 0")
    node.get("metadata_bits", float, default=80.0, check=_non_negative,
             constraint="metadata_bits >= 0")
    node.get("n_trials", int, default=1000, check=lambda v: v >= 1, constraint="n_trials >= 1")
    node.get("mode", str, default="complex", check=lambda v: v in ("complex", "real"),
             constraint="mode in {complex, real}")
    node.seen.add("protocol")
    if "protocol" not in node.data:
        _raise_missing(node, "protocol")
    proto = node.child("protocol")
    kind = proto.require("kind", str, check=lambda v: v in ("slotted-aloha",
                                                            "coded-random-access"),
                         constraint="kind in {slotted-aloha, coded-random-access}")
    if kind == "slotted-aloha":
        proto.require("p_tx", float, check=lambda v: 0 < v <= 1, constraint="p_tx in (0,1]")
    else:
        proto.require("mean_degree", float, check=lambda v: v >= 1, constraint="mean_degree >= 1")
        proto.require("frame_slots", int, check=lambda v: v >= 1, constraint="frame_slots >= 1")
    proto.reject_unknown()
    _validate_k_range(node)
    node.reject_unknown()
    basic = node.data.get("basic_payload_bits")
    if basic is not None and basic > node.data["payload_bits"]:
        raise ConfigError(node.key_path("basic_payload_bits"),
                          "must not exceed payload_bits")


_BODY_VALIDATORS = {
    "fbl": _validate_fbl,
    "goodput": _validate_goodput,
    "compare": _validate_compare,
    "budget": _validate_budget,
    "rsc": _validate_rsc,
    "urcl": _validate_urcl,
    "urcs": _validate_urcs,
}


def parse_config(text) -> ScenarioConfig:
    """Parse and validate a JSON scenario config.

    Raises ConfigError naming the offending key path on any violation.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ConfigError("<config>", f"not valid UTF-8: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("<config>", f"not valid JSON: {e}") from e

    root = _Node(data, "")
    version = root.require("version", str)
    if version not in SUPPORTED_VERSIONS:
        raise ConfigError("version", f"unsupported version {version!r}; "
                                     f"supported: {list(SUPPORTED_VERSIONS)}")
    seed = root.get("seed", int, default=DEFAULT_SEED,
                    check=lambda v: 0 <= v < 2**64, constraint="seed in [0, 2^64)")

    output = OutputSpec()
    if "output" in root.data:
        out = root.child("output")
        root.seen.add("output")
        fmt = out.get("format", str, default="json",
                      check=lambda v: v in OUTPUT_FORMATS,
                      constraint="format in {json, csv}")
        path = out.get("path", str)
        out.reject_unknown()
        output = OutputSpec(format=fmt, path=path)

    present = [k for k in BODY_KINDS if k in root.data]
    if len(present) != 1:
        raise ConfigError("<config>",
                          f"exactly one body of {list(BODY_KINDS)} required, got {present}")
    kind = present[0]
    root.seen.add(kind)
    _BODY_VALIDATORS[kind](root.child(kind))
    root.reject_unknown()

    return ScenarioConfig(
        version=version, seed=seed, body_kind=kind, body=data[kind], output=output
    )
