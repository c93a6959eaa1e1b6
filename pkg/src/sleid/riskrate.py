"""Account risk rating: anonymity, wash trading, lifespan, DeFi involvement.

Accounts scoring below the risk threshold on every criterion are treated
as reliably normal; DeFi involvement is an independent admission signal
for dataset expansion. All scores are pure functions of the frozen graph,
so batch scoring is safe to run concurrently.

Score forms (the criteria are named in the literature without formulas,
so the exact shapes are decisions of this module, all configurable):

* anonymity   = 1 / (1 + scale * (n_tx_total - 1)), scale 1 by default
* wash trade  = fraction of the account's transactions participating in a
  reciprocal pair (reverse edge within a time window) or self-loop
* lifespan    = exp(-active_span_days / decay_days), 30-day decay default
"""

import hashlib
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import ParseError
from .txgraph import AccountNode, LedgerGraph, normalize_address

DEFAULT_RISK_THRESHOLD = 0.2
DEFAULT_WASH_WINDOW_SECONDS = 24 * 3600
DEFAULT_LIFESPAN_DECAY_DAYS = 30.0


@dataclass(frozen=True)
class RiskProfile:
    address: str
    anonymity: float
    wash_trading: float
    lifespan: float
    is_normal: bool
    defi_involved: bool


def anonymity_score(summary: AccountNode, scale: float = 1.0) -> float:
    """1 for single-transaction accounts, decaying toward 0 with activity."""
    n = summary.n_tx_total
    return 1.0 / (1.0 + scale * (n - 1))


def lifespan_score(
    summary: AccountNode,
    now: int,
    decay_days: float = DEFAULT_LIFESPAN_DECAY_DAYS,
) -> float:
    """1 at zero active span, exponentially decaying with span length."""
    if not summary.first_seen <= summary.last_seen <= now:
        raise ValueError(
            f"{summary.address}: require first_seen <= last_seen <= now"
        )
    span_days = (summary.last_seen - summary.first_seen) / 86400.0
    return math.exp(-span_days / decay_days)


def _wash_participation(graph: LedgerGraph, window_seconds: int) -> np.ndarray:
    """Per-record flag: record is a self-loop or has a reverse edge in window."""
    cached = graph._risk_cache.get(("wash", window_seconds))
    if cached is not None:
        return cached

    n = graph.n_accounts
    snd = graph.snd
    rcv = graph.rcv
    ts = graph.ts
    part = snd == rcv
    non_self = np.flatnonzero(~part)
    if len(non_self) > 0:
        key = snd[non_self] * n + rcv[non_self]
        rev = rcv[non_self] * n + snd[non_self]
        t = ts[non_self]
        t0 = int(t.min())
        toff = t - t0
        span = int(toff.max()) + 1
        width = span + 2 * window_seconds + 2
        if n * n < 2**62 // max(width, 1):
            # combined (key, ts) ordinal fits an int64: fully vectorized path
            order = np.argsort(key * width + toff, kind="stable")
            skey = key[order]
            stoff = toff[order]
            combined = skey * width + stoff
            lo = np.searchsorted(combined, rev * width + np.maximum(toff - window_seconds, 0))
            hi = np.searchsorted(
                combined,
                rev * width + np.minimum(toff + window_seconds, width - 1),
                side="right",
            )
            part[non_self] = hi > lo
        else:
            by_pair: dict[int, list[int]] = {}
            for k, tt in zip(key.tolist(), t.tolist()):
                by_pair.setdefault(k, []).append(tt)
            for v in by_pair.values():
                v.sort()
            flags = np.zeros(len(non_self), dtype=bool)
            for i, (rk, tt) in enumerate(zip(rev.tolist(), t.tolist())):
                times = by_pair.get(rk)
                if not times:
                    continue
                a = bisect_left(times, tt - window_seconds)
                b = bisect_right(times, tt + window_seconds)
                flags[i] = b > a
            part[non_self] = flags

    graph._risk_cache[("wash", window_seconds)] = part
    return part


def wash_trading_score(
    graph: LedgerGraph,
    address: str,
    window_seconds: int = DEFAULT_WASH_WINDOW_SECONDS,
) -> float:
    """Fraction of the account's transactions that look like wash trading."""
    idx = graph.account_id(address)
    part = _wash_participation(graph, window_seconds)
    inc = graph.incident_records(idx)
    total = graph.n_tx_total[idx]
    if total == 0:
        return 0.0
    return float(part[inc].sum()) / float(total)


def _registry_key(registry: frozenset[str]) -> str:
    digest = hashlib.sha256("\n".join(sorted(registry)).encode()).hexdigest()
    return digest


def _defi_flags(graph: LedgerGraph, registry: frozenset[str]) -> np.ndarray:
    """Per-account flag: any transaction touches the registry."""
    key = ("defi", _registry_key(registry))
    cached = graph._risk_cache.get(key)
    if cached is not None:
        return cached

    n = graph.n_accounts
    reg_acc = np.array(
        [graph._account_index[a] for a in registry if a in graph._account_index],
        dtype=np.int64,
    )
    reg_tok = np.array(
        [i for i, t in enumerate(graph.tokens) if t in registry], dtype=np.int64
    )
    tok_flag = np.isin(graph.token_idx, reg_tok)
    snd_in = np.isin(graph.snd, reg_acc)
    rcv_in = np.isin(graph.rcv, reg_acc)
    # a sender is involved when the receiver or token matches, and vice versa;
    # self-loops make the account its own counterparty
    out_hit = np.bincount(graph.snd, weights=(rcv_in | tok_flag), minlength=n)
    in_hit = np.bincount(graph.rcv, weights=(snd_in | tok_flag), minlength=n)
    flags = (out_hit + in_hit) > 0
    graph._risk_cache[key] = flags
    return flags


def is_defi_involved(graph: LedgerGraph, address: str, defi_registry) -> bool:
    registry = frozenset(defi_registry)
    if not registry:
        raise ValueError("defi registry must be non-empty")
    idx = graph.account_id(address)
    return bool(_defi_flags(graph, registry)[idx])


def risk_profile(
    graph: LedgerGraph,
    address: str,
    defi_registry,
    now: int | None = None,
    threshold: float = DEFAULT_RISK_THRESHOLD,
    wash_window_seconds: int = DEFAULT_WASH_WINDOW_SECONDS,
    lifespan_decay_days: float = DEFAULT_LIFESPAN_DECAY_DAYS,
    anonymity_scale: float = 1.0,
    aggregate: str = "per_criterion",
) -> RiskProfile:
    """Compose the three criteria scores plus the DeFi involvement flag.

    ``aggregate`` selects how the normality rule combines the criteria:
    "per_criterion" requires each score below the threshold, "max" compares
    the maximum score against it (the two coincide numerically, but the
    latter also exposes a single aggregate value for auditing).
    """
    if aggregate not in ("per_criterion", "max"):
        raise ValueError(f"unknown aggregate mode {aggregate!r}")
    summary = graph.account_summary(address)
    if now is None:
        now = graph.latest_timestamp
    anon = anonymity_score(summary, scale=anonymity_scale)
    wash = wash_trading_score(graph, address, window_seconds=wash_window_seconds)
    life = lifespan_score(summary, now, decay_days=lifespan_decay_days)
    if aggregate == "max":
        normal = max(anon, wash, life) < threshold
    else:
        normal = anon < threshold and wash < threshold and life < threshold
    return RiskProfile(
        address=summary.address,
        anonymity=anon,
        wash_trading=wash,
        lifespan=life,
        is_normal=normal,
        defi_involved=is_defi_involved(graph, address, defi_registry),
    )


def batch_risk_profiles(graph, addresses, defi_registry, **kwargs) -> list[RiskProfile]:
    """Score many accounts; shares the graph-level caches across calls."""
    registry = frozenset(defi_registry)
    if addresses:
        # prime caches once so per-address calls are table lookups
        _wash_participation(
            graph, kwargs.get("wash_window_seconds", DEFAULT_WASH_WINDOW_SECONDS)
        )
        _defi_flags(graph, registry)
    return [risk_profile(graph, a, registry, **kwargs) for a in addresses]


def load_registry(path) -> frozenset[str]:
    """Read a newline-delimited address registry; '#' starts a comment."""
    addresses = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            addresses.add(normalize_address(text, line=line_no))
    if not addresses:
        raise ParseError(f"registry {path} contains no addresses")
    return frozenset(addresses)


def write_registry(registry, path):
    with open(path, "w", encoding="utf-8") as fh:
        for addr in sorted(registry):
            fh.write(addr + "\n")
