"""Per-account feature inventory, matrix preprocessing, and RFE.

The learned schema covers six groups: graph structure (degrees and
neighborhood structure), temporal activity (blocks, spans, regularity,
burstiness), node attributes (transaction/token/method counts),
transaction statistics (fees and transferred values by direction and
event class), volatility indicators, and neighborhood aggregates over
order-1 counterparties.

Event classes used throughout:

* tx events   = native transfers and plain contract calls (gas-fee carriers)
* erc events  = token transfers and approvals (token-fee carriers)
* value stats = native transfers for the *_value_transfer features and
  token transfers for the *_value_ERC features; approvals move no value

Undefined quantities (sample std of a single value, aggregates over an
empty neighborhood, burst of a zero-span account) are emitted as missing
and resolved by :func:`preprocess` via mean imputation; extreme values are
clipped at the per-column 99th percentile (nearest-rank).
"""

import hashlib
import io
import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import BadConfig, NotFound, ParseError, SchemaError
from .txgraph import LedgerGraph, TxKind

SCHEMA_VERSION = 1
MATRIX_MAGIC = b"SLFEAT\x01"

BURST_WINDOW_SECONDS = 3600

#: columns present in exports for bookkeeping but never part of the learned schema
METADATA_COLUMNS = ("label", "tag")

_STAT_SUFFIXES_DEGREE = ("mean", "max", "min", "median", "std")
_STAT_SUFFIXES_PER_NEIGHBOR = ("mean", "min", "max", "median", "std")


def _build_schema() -> tuple[tuple[str, ...], dict[str, tuple[str, ...]]]:
    names: list[str] = []
    categories: dict[str, list[str]] = {}

    def add(name: str, category: str):
        if name not in categories:
            names.append(name)
            categories[name] = [category]
        elif category not in categories[name]:
            categories[name].append(category)

    g = "graph_related"
    for n in ("in_degree", "out_degree", "total_degree", "neighbors"):
        add(n, g)
    for base in ("in_degree", "out_degree", "total_degree"):
        for s in _STAT_SUFFIXES_DEGREE:
            add(f"{base}_{s}", g)
    for s in _STAT_SUFFIXES_PER_NEIGHBOR:
        add(f"tx_per_neighbor_{s}", g)
    add("multi_transacted_neighbors", g)

    t = "temporal"
    for n in ("n_blocks", "min_block", "max_block",
              "block_height_first_sent_in", "block_height_first_received_in",
              "block_height_last_sent_in", "block_height_last_received_in",
              "transacted_first", "transacted_last", "Age",
              "tx_per_block_mean", "tx_per_block_max", "consistency", "burst"):
        add(n, t)

    nd = "node"
    for n in ("n_tx", "n_tx_out", "n_tx_in", "n_tx_total",
              "self_tx_count", "n_tokens", "n_method"):
        add(n, nd)

    tx = "transaction"
    for n in ("n_transfers", "n_ERC", "n_approve"):
        add(n, tx)
    for s in ("mean", "median", "max", "min", "std"):
        add(f"{s}_tx_fee", tx)
    for s in ("mean", "median", "max", "min", "std"):
        add(f"{s}_erc_fee", tx)
    for n in ("mean_out_value_transfer", "median_out_value_transfer",
              "mean_in_value_transfers", "median_in_value_transfers",
              "sum_out_value_transfer", "sum_in_value_transfer",
              "std_out_value_transfer", "std_in_value_transfer",
              "sum_out_value_ERC", "sum_in_value_ERC",
              "mean_in_value_ERC", "mean_out_value_ERC",
              "median_in_value_ERC", "median_out_value_ERC",
              "std_out_value_ERC", "std_in_value_ERC"):
        add(n, tx)

    v = "volatility"
    for n in ("burst", "burst_tx_fee", "burst_erc_fee", "std_tx_fee",
              "std_erc_fee", "std_out_value_transfer", "std_in_value_transfer",
              "std_out_value_ERC", "std_in_value_ERC", "tx_per_block_max"):
        add(n, v)

    nb = "neighborhood"
    for s in _STAT_SUFFIXES_PER_NEIGHBOR:
        add(f"tx_per_neighbor_{s}", nb)
    for base in ("mean_tx_fee", "max_tx_fee", "mean_erc_fee", "max_erc_fee"):
        for s in _STAT_SUFFIXES_DEGREE:
            add(f"{base}_neighbor_{s}", nb)
    for base in ("in_degree", "out_degree", "total_degree"):
        for s in _STAT_SUFFIXES_DEGREE:
            add(f"{base}_{s}", nb)
    add("multi_transacted_neighbors", nb)

    return tuple(names), {k: tuple(v) for k, v in categories.items()}


FEATURE_NAMES, FEATURE_CATEGORIES = _build_schema()


@dataclass(frozen=True)
class FeatureSchema:
    names: tuple[str, ...]
    version: int = SCHEMA_VERSION

    def digest(self) -> str:
        payload = json.dumps(
            {"version": self.version, "names": list(self.names)},
            sort_keys=True,
        ).encode()
        return hashlib.sha256(payload).hexdigest()

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SchemaError(f"feature {name!r} not in schema") from None


CANONICAL_SCHEMA = FeatureSchema(FEATURE_NAMES)


@dataclass
class FeatureVector:
    address: str
    names: tuple[str, ...]
    values: np.ndarray
    schema_version: int = SCHEMA_VERSION

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values.tolist()))


@dataclass
class FeatureMatrix:
    """Rows are accounts in lexicographic address order."""

    addresses: list[str]
    X: np.ndarray
    schema: FeatureSchema
    missing_mask: np.ndarray  # True where the raw value was undefined

    def __post_init__(self):
        if self.X.shape != (len(self.addresses), len(self.schema.names)):
            raise SchemaError("matrix shape does not match addresses/schema")

    @property
    def n_rows(self) -> int:
        return len(self.addresses)

    def row_index(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.addresses)}

    def select_columns(self, names) -> "FeatureMatrix":
        idx = [self.schema.index_of(n) for n in names]
        return FeatureMatrix(
            addresses=list(self.addresses),
            X=self.X[:, idx].copy(),
            schema=FeatureSchema(tuple(names), self.schema.version),
            missing_mask=self.missing_mask[:, idx].copy(),
        )

    def select_rows(self, row_ids) -> "FeatureMatrix":
        row_ids = list(row_ids)
        return FeatureMatrix(
            addresses=[self.addresses[i] for i in row_ids],
            X=self.X[row_ids].copy(),
            schema=self.schema,
            missing_mask=self.missing_mask[row_ids].copy(),
        )

    # -- persistence ---------------------------------------------------------

    def to_bytes(self) -> bytes:
        out = io.BytesIO()
        out.write(MATRIX_MAGIC)
        names_blob = json.dumps(list(self.schema.names)).encode()
        out.write(struct.pack("<IQII", self.schema.version, self.n_rows,
                              len(self.schema.names), len(names_blob)))
        out.write(names_blob)
        for a in self.addresses:
            raw = a.encode()
            out.write(struct.pack("<H", len(raw)))
            out.write(raw)
        out.write(self.X.astype("<f8").tobytes(order="C"))
        out.write(np.packbits(self.missing_mask.reshape(-1)).tobytes())
        return out.getvalue()

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())
        manifest = {
            "schema_version": self.schema.version,
            "names": list(self.schema.names),
            "digest": self.schema.digest(),
            "rows": self.n_rows,
        }
        with open(str(path) + ".manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("address," + ",".join(self.schema.names) + "\n")
            for i, addr in enumerate(self.addresses):
                row = ",".join(repr(v) for v in self.X[i].tolist())
                fh.write(f"{addr},{row}\n")


def matrix_from_bytes(data: bytes) -> FeatureMatrix:
    if data[: len(MATRIX_MAGIC)] != MATRIX_MAGIC:
        raise ParseError("not a feature matrix container (bad magic)")
    off = len(MATRIX_MAGIC)
    version, rows, cols, names_len = struct.unpack_from("<IQII", data, off)
    off += struct.calcsize("<IQII")
    names = tuple(json.loads(data[off:off + names_len].decode()))
    off += names_len
    addresses = []
    for _ in range(rows):
        (ln,) = struct.unpack_from("<H", data, off)
        off += 2
        addresses.append(data[off:off + ln].decode())
        off += ln
    nbytes = rows * cols * 8
    X = np.frombuffer(data[off:off + nbytes], dtype="<f8").reshape(rows, cols).copy()
    off += nbytes
    nbits = rows * cols
    mask_bytes = (nbits + 7) // 8
    mask = np.unpackbits(
        np.frombuffer(data[off:off + mask_bytes], dtype=np.uint8), count=nbits
    ).astype(bool).reshape(rows, cols)
    return FeatureMatrix(addresses, X, FeatureSchema(names, version), mask)


def load_matrix(path) -> FeatureMatrix:
    with open(path, "rb") as fh:
        return matrix_from_bytes(fh.read())


# -- grouped statistics helpers --------------------------------------------


def _grouped(keys, values, n, *, sort_values_for_median=True):
    """Five-number stats of ``values`` grouped by sorted integer ``keys``.

    Returns dict of length-``n`` arrays (mean, max, min, median, std) with
    NaN for groups that do not appear. ``keys`` must be non-decreasing;
    when ``sort_values_for_median`` is set the rows are re-sorted by
    (key, value) internally so medians are exact.
    """
    out = {s: np.full(n, np.nan) for s in ("mean", "max", "min", "median", "std", "sum")}
    out["count"] = np.zeros(n, dtype=np.int64)
    if len(keys) == 0:
        return out
    if sort_values_for_median:
        order = np.lexsort((values, keys))
        keys = keys[order]
        values = values[order]
    starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
    counts = np.diff(np.r_[starts, len(keys)])
    gk = keys[starts]
    sums = np.add.reduceat(values, starts)
    means = sums / counts
    out["mean"][gk] = means
    out["max"][gk] = np.maximum.reduceat(values, starts)
    out["min"][gk] = np.minimum.reduceat(values, starts)
    lo = starts + (counts - 1) // 2
    hi = starts + counts // 2
    out["median"][gk] = 0.5 * (values[lo] + values[hi])
    sumsq = np.add.reduceat(values * values, starts)
    with np.errstate(invalid="ignore", divide="ignore"):
        var = (sumsq - counts * means * means) / (counts - 1)
    var = np.where(counts >= 2, np.maximum(var, 0.0), np.nan)
    out["std"][gk] = np.sqrt(var)
    out["count"][gk] = counts
    out["sum"][gk] = sums
    return out


def _windowed_max(acc, toff, weights, window, n):
    """Per-account max over sliding [t, t+window) sums of ``weights``.

    ``acc``/``toff`` must be sorted by (account, time offset).
    """
    result = np.full(n, np.nan)
    if len(acc) == 0:
        return result
    width = int(toff.max()) + window + 2
    if n * width < 2**62:
        comb = acc * width + toff
        hi = np.searchsorted(comb, acc * width + toff + window, side="left")
        pref = np.concatenate([[0.0], np.cumsum(weights)])
        win = pref[hi] - pref[np.arange(len(acc))]
        starts = np.flatnonzero(np.r_[True, acc[1:] != acc[:-1]])
        gk = acc[starts]
        result[gk] = np.maximum.reduceat(win, starts)
    else:
        i = 0
        m = len(acc)
        while i < m:
            j = i
            a = acc[i]
            while j < m and acc[j] == a:
                j += 1
            best = 0.0
            hi_ptr = i
            run = 0.0
            for k in range(i, j):
                if hi_ptr < k:
                    hi_ptr = k
                    run = 0.0
                while hi_ptr < j and toff[hi_ptr] < toff[k] + window:
                    run += weights[hi_ptr]
                    hi_ptr += 1
                best = max(best, run)
                run -= weights[k]
            result[a] = best
            i = j
    return result


class _FeatureTables:
    """Whole-graph feature columns; computed once and cached on the graph."""

    def __init__(self, graph: LedgerGraph):
        n = graph.n_accounts
        self.n = n
        kind = graph.kind_code
        is_native = kind == 0
        is_erc20 = kind == 1
        is_approve = kind == 2
        is_call = kind == 3
        tx_event = is_native | is_call
        erc_event = is_erc20 | is_approve

        cols: dict[str, np.ndarray] = {}
        self.cols = cols

        # --- degrees and neighbor structure
        in_deg = np.zeros(n)
        out_deg = np.zeros(n)
        if graph.n_transactions:
            pairs_in = np.unique(graph.rcv * n + graph.snd)
            in_deg = np.bincount(pairs_in // n, minlength=n).astype(float)
            pairs_out = np.unique(graph.snd * n + graph.rcv)
            out_deg = np.bincount(pairs_out // n, minlength=n).astype(float)
        cols["in_degree"] = in_deg
        cols["out_degree"] = out_deg
        cols["total_degree"] = in_deg + out_deg

        pair_acc, pair_other, pair_counts, _ = graph._pairs()
        nb_mask = pair_acc != pair_other  # exclude self for neighbor features
        nb_acc = pair_acc[nb_mask]
        nb_other = pair_other[nb_mask]
        nb_counts = pair_counts[nb_mask].astype(float)
        cols["neighbors"] = np.bincount(nb_acc, minlength=n).astype(float)
        cols["multi_transacted_neighbors"] = np.bincount(
            nb_acc[nb_counts >= 2], minlength=n
        ).astype(float)

        tpn = _grouped(nb_acc, nb_counts, n)
        for s in _STAT_SUFFIXES_PER_NEIGHBOR:
            cols[f"tx_per_neighbor_{s}"] = tpn[s]

        # --- temporal
        inc_acc = graph.inc_acc
        inc_rec = graph.inc_rec
        blk = graph.block.astype(float)
        ts = graph.ts

        blk_stats = _grouped(inc_acc, blk[inc_rec], n)
        cols["min_block"] = blk_stats["min"]
        cols["max_block"] = blk_stats["max"]

        # first/last sent uses the sender column, first/last received the receiver
        order_s = np.argsort(graph.snd, kind="stable")
        s_stats = _grouped(graph.snd[order_s], blk[order_s], n)
        cols["block_height_first_sent_in"] = s_stats["min"]
        cols["block_height_last_sent_in"] = s_stats["max"]
        order_r = np.argsort(graph.rcv, kind="stable")
        r_stats = _grouped(graph.rcv[order_r], blk[order_r], n)
        cols["block_height_first_received_in"] = r_stats["min"]
        cols["block_height_last_received_in"] = r_stats["max"]

        first = graph.first_seen.astype(float) if n else np.zeros(0)
        last = graph.last_seen.astype(float) if n else np.zeros(0)
        cols["transacted_first"] = first
        cols["transacted_last"] = last
        cols["Age"] = (last - first) / 86400.0

        n_tx_total = graph.n_tx_total.astype(float)
        cols["n_tx"] = n_tx_total
        cols["n_tx_total"] = n_tx_total
        cols["n_tx_out"] = graph.n_tx_out.astype(float)
        cols["n_tx_in"] = graph.n_tx_in.astype(float)
        cols["self_tx_count"] = graph.self_tx.astype(float)
        cols["n_tokens"] = graph.distinct_tokens.astype(float)
        cols["n_method"] = graph.distinct_methods.astype(float)

        # distinct blocks and per-block counts: group incident rows by (acc, block)
        if len(inc_acc):
            order = np.lexsort((blk[inc_rec], inc_acc))
            ab_acc = inc_acc[order]
            ab_blk = blk[inc_rec][order]
            change = np.r_[True, (ab_acc[1:] != ab_acc[:-1]) | (ab_blk[1:] != ab_blk[:-1])]
            starts = np.flatnonzero(change)
            per_block = np.diff(np.r_[starts, len(ab_acc)]).astype(float)
            grp_acc = ab_acc[starts]
            n_blocks = np.bincount(grp_acc, minlength=n).astype(float)
            tpb = _grouped(grp_acc, per_block, n)
            cols["tx_per_block_max"] = tpb["max"]
        else:
            n_blocks = np.zeros(n)
            cols["tx_per_block_max"] = np.full(n, np.nan)
        n_blocks[n_blocks == 0] = np.nan
        cols["n_blocks"] = n_blocks
        with np.errstate(invalid="ignore"):
            cols["tx_per_block_mean"] = n_tx_total / n_blocks

        # consistency and burst need per-account time-ordered series
        if len(inc_acc):
            order = np.lexsort((ts[inc_rec], inc_acc))
            t_acc = inc_acc[order]
            t_ts = ts[inc_rec][order]
            same = t_acc[1:] == t_acc[:-1]
            gap_acc = t_acc[1:][same]
            gaps = (t_ts[1:] - t_ts[:-1])[same].astype(float)
            g = _grouped(gap_acc, gaps, n)
            with np.errstate(invalid="ignore", divide="ignore"):
                consistency = 1.0 - g["std"] / g["mean"]
            consistency = np.where(g["mean"] > 0, np.maximum(consistency, 0.0), np.nan)
            cols["consistency"] = consistency

            t0 = int(t_ts.min()) if len(t_ts) else 0
            toff = (t_ts - t0).astype(np.int64)
            win_max = _windowed_max(
                t_acc, toff, np.ones(len(t_acc)), BURST_WINDOW_SECONDS, n
            )
            span_hours = (last - first) / 3600.0
            with np.errstate(invalid="ignore", divide="ignore"):
                burst = win_max / (n_tx_total / span_hours)
            cols["burst"] = np.where(span_hours > 0, burst, np.nan)
        else:
            cols["consistency"] = np.full(n, np.nan)
            cols["burst"] = np.full(n, np.nan)

        # --- event counts
        inc_kind_native = is_native[inc_rec]
        inc_kind_erc20 = is_erc20[inc_rec]
        inc_kind_approve = is_approve[inc_rec]
        cols["n_transfers"] = np.bincount(
            inc_acc[inc_kind_native | inc_kind_erc20], minlength=n
        ).astype(float)
        cols["n_ERC"] = np.bincount(
            inc_acc[inc_kind_erc20 | inc_kind_approve], minlength=n
        ).astype(float)
        cols["n_approve"] = np.bincount(
            inc_acc[inc_kind_approve], minlength=n
        ).astype(float)

        # --- fee statistics per event class (over incident records)
        fee = graph.fee_f
        for label, mask in (("tx_fee", tx_event), ("erc_fee", erc_event)):
            sel = mask[inc_rec]
            stats = _grouped(inc_acc[sel], fee[inc_rec][sel], n)
            for s in ("mean", "median", "max", "min", "std"):
                cols[f"{s}_{label}"] = stats[s]

        # --- value statistics by direction and class
        val = graph.value_f
        for label, kmask in (("value_transfer", is_native), ("value_ERC", is_erc20)):
            for direction, owner in (("out", graph.snd), ("in", graph.rcv)):
                sel = np.flatnonzero(kmask)
                keys = owner[sel]
                order = np.argsort(keys, kind="stable")
                stats = _grouped(keys[order], val[sel][order], n)
                suffix = label
                if direction == "in" and label == "value_transfer":
                    suffix = "value_transfers"  # inventory spells the inbound native pair plural
                for s in ("mean", "median"):
                    name = f"{s}_{direction}_{suffix}"
                    if name in FEATURE_CATEGORIES:
                        cols[name] = stats[s]
                sums = stats["sum"].copy()
                sums[np.isnan(sums)] = 0.0  # no events means zero flow, not unknown
                cols[f"sum_{direction}_{label}"] = sums
                cols[f"std_{direction}_{label}"] = stats["std"]

        # --- fee burstiness (analogue of burst over fee series)
        for label, mask in (("tx_fee", tx_event), ("erc_fee", erc_event)):
            sel = mask[inc_rec]
            acc_f = inc_acc[sel]
            ts_f = ts[inc_rec][sel]
            fee_f = fee[inc_rec][sel]
            out = np.full(n, np.nan)
            if len(acc_f):
                order = np.lexsort((ts_f, acc_f))
                acc_f = acc_f[order]
                ts_f = ts_f[order]
                fee_f = fee_f[order]
                t0 = int(ts_f.min())
                toff = (ts_f - t0).astype(np.int64)
                win = _windowed_max(acc_f, toff, fee_f, BURST_WINDOW_SECONDS, n)
                fstats = _grouped(acc_f, fee_f, n)
                total_fee = fstats["sum"]
                tstats = _grouped(acc_f, ts_f.astype(float), n)
                span_h = (tstats["max"] - tstats["min"]) / 3600.0
                with np.errstate(invalid="ignore", divide="ignore"):
                    rate = total_fee / span_h
                    out = win / rate
                out = np.where((span_h > 0) & (total_fee > 0), out, np.nan)
            cols[f"burst_{label}"] = out

        # --- neighborhood aggregates over order-1 counterparties
        for base in ("in_degree", "out_degree", "total_degree",
                     "mean_tx_fee", "max_tx_fee", "mean_erc_fee", "max_erc_fee"):
            vals = cols[base][nb_other]
            good = ~np.isnan(vals)
            stats = _grouped(nb_acc[good], vals[good], n)
            for s in _STAT_SUFFIXES_DEGREE:
                key = f"{base}_{s}" if base.endswith("degree") else f"{base}_neighbor_{s}"
                cols[key] = stats[s]

        missing = [name for name in FEATURE_NAMES if name not in cols]
        if missing:
            raise SchemaError(f"feature table missing columns: {missing}")
        self.matrix = np.column_stack([cols[name] for name in FEATURE_NAMES])


def _tables(graph: LedgerGraph) -> _FeatureTables:
    tables = graph._feature_cache.get("tables")
    if tables is None:
        tables = _FeatureTables(graph)
        graph._feature_cache["tables"] = tables
    return tables


def extract_features(graph: LedgerGraph, address: str) -> FeatureVector:
    """Compute the full inventory for one account (missing values are NaN)."""
    idx = graph.account_id(address)
    tables = _tables(graph)
    return FeatureVector(
        address=graph.accounts[idx],
        names=FEATURE_NAMES,
        values=tables.matrix[idx].copy(),
    )


def extract_matrix(graph: LedgerGraph, addresses) -> FeatureMatrix:
    """Rows for the requested accounts, lexicographically ordered."""
    addrs = sorted({a.lower() for a in addresses})
    ids = np.array([graph.account_id(a) for a in addrs], dtype=np.int64)
    tables = _tables(graph)
    X = tables.matrix[ids].copy()
    return FeatureMatrix(
        addresses=addrs,
        X=X,
        schema=CANONICAL_SCHEMA,
        missing_mask=np.isnan(X),
    )


# -- preprocessing -----------------------------------------------------------


@dataclass
class PreprocessReport:
    dropped_columns: list[str]
    means: dict[str, float]
    clip_bounds: dict[str, float]


def nearest_rank_percentile(values: np.ndarray, pct: float) -> float:
    """Nearest-rank percentile: value at index ceil(pct/100 * n), 1-based."""
    v = np.sort(values)
    k = int(np.ceil(pct / 100.0 * len(v)))
    k = min(max(k, 1), len(v))
    return float(v[k - 1])


def preprocess(
    matrix: FeatureMatrix, clip_percentile: float = 99.0
) -> tuple[FeatureMatrix, PreprocessReport]:
    """Mean-impute missing cells and clip columns at the given percentile.

    Infinities count as missing. Columns that are entirely missing are
    degenerate: they are dropped and reported. The operation is idempotent.
    """
    if matrix.n_rows == 0:
        raise BadConfig("cannot preprocess an empty matrix")
    X = matrix.X.astype(np.float64, copy=True)
    X[~np.isfinite(X)] = np.nan
    observed = ~np.isnan(X)

    keep: list[int] = []
    dropped: list[str] = []
    for j, name in enumerate(matrix.schema.names):
        if observed[:, j].any():
            keep.append(j)
        else:
            dropped.append(name)

    names = tuple(matrix.schema.names[j] for j in keep)
    X = X[:, keep]
    observed = observed[:, keep]
    mask = matrix.missing_mask[:, keep] | ~observed

    means: dict[str, float] = {}
    bounds: dict[str, float] = {}
    for j, name in enumerate(names):
        col = X[:, j]
        obs = observed[:, j]
        mean = float(col[obs].mean())
        col[~obs] = mean
        bound = nearest_rank_percentile(col, clip_percentile)
        np.minimum(col, bound, out=col)
        means[name] = mean
        bounds[name] = bound

    out = FeatureMatrix(
        addresses=list(matrix.addresses),
        X=X,
        schema=FeatureSchema(names, matrix.schema.version),
        missing_mask=mask,
    )
    return out, PreprocessReport(dropped, means, bounds)


# -- recursive feature elimination --------------------------------------------


def rfe(
    matrix: FeatureMatrix,
    labels: np.ndarray,
    target_k: int,
    learner_factory=None,
    seed: int = 0,
    step_fraction: float = 0.1,
) -> list[str]:
    """Iteratively drop the least important features until target_k remain.

    ``learner_factory(X, y)`` must return a fitted model exposing
    ``feature_importances_``. Ties in importance are broken so the
    canonically earlier column survives.
    """
    n_cols = len(matrix.schema.names)
    if not 1 <= target_k or target_k > n_cols:
        raise BadConfig(f"target_k {target_k} out of range 1..{n_cols}")
    labels = np.asarray(labels)
    if set(np.unique(labels)) - {0, 1}:
        raise BadConfig("labels must be binary 0/1")
    if learner_factory is None:
        from .trees import RFParams, fit_random_forest

        params = RFParams(n_estimators=60, max_depth=10)

        def learner_factory(X, y, _params=params, _seed=seed):
            return fit_random_forest(X, y, _params, seed=_seed)

    remaining = list(range(n_cols))
    while len(remaining) > target_k:
        model = learner_factory(matrix.X[:, remaining], labels)
        importances = np.asarray(model.feature_importances_, dtype=float)
        step = max(1, int(step_fraction * len(remaining)))
        step = min(step, len(remaining) - target_k)
        # drop lowest importance first; among ties drop the later column
        order = sorted(
            range(len(remaining)),
            key=lambda i: (importances[i], -remaining[i]),
        )
        drop = {remaining[i] for i in order[:step]}
        remaining = [c for c in remaining if c not in drop]
    return [matrix.schema.names[c] for c in remaining]
