"""Bipartite account/transaction ledger graph.

Accounts and transactions form the two node sets; every ingested record is
one transaction node with exactly one sender edge and one receiver edge.
Multi-recipient events are expected to arrive pre-flattened as one record
per (sender, receiver) pair sharing a tx_hash, so the uniqueness key is
(tx_hash, sub_index).

Ingestion is single-writer and append-only; :func:`ingest` freezes the
graph into a canonical, immutable columnar form (records sorted by
(tx_hash, sub_index), accounts sorted lexicographically) that is safe to
share across threads and serializes identically regardless of input order.
"""

import csv
import gzip
import io
import json
import re
import struct
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    ConflictingRecord,
    NotFound,
    OrderingViolation,
    ParseError,
)

_ADDRESS_RE = re.compile(r"^0x[0-9a-fA-F]{40}$")
_METHOD_RE = re.compile(r"^0x[0-9a-fA-F]{8}$")

GRAPH_MAGIC = b"SLGRAPH\x01"


class TxKind(str, Enum):
    native_transfer = "native_transfer"
    erc20_transfer = "erc20_transfer"
    approve = "approve"
    contract_call = "contract_call"


#: kinds that describe token events and therefore require a token contract
TOKEN_KINDS = (TxKind.erc20_transfer, TxKind.approve)


class LabelState(str, Enum):
    licit = "licit"
    illicit = "illicit"
    unknown = "unknown"
    pseudo_illicit = "pseudo_illicit"
    filtered_unknown = "filtered_unknown"


class Provenance(str, Enum):
    seed = "seed"
    risk_rule = "risk_rule"
    isolation_forest = "isolation_forest"
    self_training = "self_training"


def normalize_address(address, line: int | None = None) -> str:
    """Validate and lowercase a 0x-prefixed 20-byte hex address."""
    if not isinstance(address, str) or not _ADDRESS_RE.match(address):
        raise ParseError(f"malformed address {address!r}", line=line)
    return address.lower()


@dataclass(frozen=True)
class TransactionRecord:
    """One flattened ledger event (a transaction node of the graph)."""

    tx_hash: str
    block_height: int
    timestamp: int
    sender: str
    receiver: str
    native_value: int
    fee: int
    kind: TxKind
    token_contract: str | None = None
    method_id: str | None = None
    sub_index: int = 0
    status: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sender", normalize_address(self.sender))
        object.__setattr__(self, "receiver", normalize_address(self.receiver))
        if not isinstance(self.kind, TxKind):
            object.__setattr__(self, "kind", TxKind(self.kind))
        if self.token_contract is not None:
            object.__setattr__(
                self, "token_contract", normalize_address(self.token_contract)
            )
        elif self.kind in TOKEN_KINDS:
            raise ParseError(
                f"record {self.tx_hash}: kind {self.kind.value} requires token_contract"
            )
        if self.method_id is not None and not _METHOD_RE.match(self.method_id):
            raise ParseError(f"record {self.tx_hash}: malformed method_id {self.method_id!r}")
        if self.block_height < 0:
            raise ParseError(f"record {self.tx_hash}: negative block_height")
        if self.native_value < 0 or self.fee < 0:
            raise ParseError(f"record {self.tx_hash}: negative value or fee")

    @property
    def key(self) -> tuple[str, int]:
        return (self.tx_hash, self.sub_index)

    def payload(self) -> tuple:
        """Everything except the uniqueness key, used for conflict checks."""
        return (
            self.block_height,
            self.timestamp,
            self.sender,
            self.receiver,
            self.native_value,
            self.fee,
            self.kind.value,
            self.token_contract,
            self.method_id,
            self.status,
        )


@dataclass
class AccountNode:
    """Per-address aggregate view over the frozen graph."""

    address: str
    first_seen: int
    last_seen: int
    n_tx_in: int
    n_tx_out: int
    self_tx_count: int
    distinct_tokens: int
    distinct_methods: int
    label: LabelState = LabelState.unknown
    provenance: Provenance | None = None

    @property
    def n_tx_total(self) -> int:
        """Distinct transactions the account participates in."""
        return self.n_tx_in + self.n_tx_out - self.self_tx_count


#: label moves permitted after initial assignment
_ALLOWED_TRANSITIONS = {
    LabelState.unknown: {LabelState.pseudo_illicit, LabelState.filtered_unknown},
    LabelState.filtered_unknown: {LabelState.pseudo_illicit, LabelState.licit},
}


class LabelBook:
    """Tracks label state and provenance per address.

    Initial assignment happens once per address; afterwards only the
    transitions of the label lattice are allowed. Seed and ground-truth
    labels (provenance ``seed``) are immutable.
    """

    def __init__(self):
        self._labels: dict[str, tuple[LabelState, Provenance | None]] = {}

    def __contains__(self, address: str) -> bool:
        return address in self._labels

    def __len__(self) -> int:
        return len(self._labels)

    def assign(self, address: str, state: LabelState, provenance: Provenance | None = None):
        if address in self._labels:
            raise ConflictingRecord(f"label for {address} already assigned")
        if state in (LabelState.pseudo_illicit, LabelState.filtered_unknown):
            if provenance not in (Provenance.isolation_forest, Provenance.self_training):
                raise ConflictingRecord(
                    f"{state.value} labels require isolation_forest or self_training provenance"
                )
        self._labels[address] = (state, provenance)

    def transition(self, address: str, state: LabelState, provenance: Provenance):
        current, current_prov = self._labels[address]
        if current_prov is Provenance.seed:
            raise ConflictingRecord(f"seed label for {address} is immutable")
        allowed = _ALLOWED_TRANSITIONS.get(current, set())
        if state not in allowed:
            raise ConflictingRecord(
                f"label transition {current.value} -> {state.value} not allowed"
            )
        if state in (LabelState.pseudo_illicit, LabelState.filtered_unknown) or (
            current is LabelState.filtered_unknown and state is LabelState.licit
        ):
            if provenance not in (Provenance.isolation_forest, Provenance.self_training):
                raise ConflictingRecord(
                    f"{state.value} transition requires pseudo-label provenance"
                )
        self._labels[address] = (state, provenance)

    def state(self, address: str) -> LabelState:
        return self._labels[address][0]

    def provenance(self, address: str) -> Provenance | None:
        return self._labels[address][1]

    def addresses(self, *states: LabelState) -> list[str]:
        wanted = set(states) if states else None
        return sorted(
            a for a, (s, _) in self._labels.items() if wanted is None or s in wanted
        )

    def items(self):
        return self._labels.items()


# kind codes for the columnar/binary representation
_KIND_TO_CODE = {k: i for i, k in enumerate(TxKind)}
_CODE_TO_KIND = {i: k for k, i in _KIND_TO_CODE.items()}


class LedgerGraph:
    """Frozen columnar bipartite graph with account-level aggregates.

    Construct via :func:`ingest` or :func:`load_graph`; instances are
    immutable and all queries are read-only and reentrant.
    """

    def __init__(self, accounts, tokens, methods, columns):
        # canonical account table (lexicographically sorted)
        self.accounts: list[str] = accounts
        self._account_index = {a: i for i, a in enumerate(accounts)}
        self.tokens: list[str] = tokens
        self.methods: list[str] = methods
        # record columns in canonical (tx_hash, sub_index) order
        self.tx_hash: list[str] = columns["tx_hash"]
        self.sub_index = columns["sub_index"]
        self.block = columns["block"]
        self.ts = columns["ts"]
        self.snd = columns["snd"]
        self.rcv = columns["rcv"]
        self.value_exact: list[int] = columns["value"]
        self.fee_exact: list[int] = columns["fee"]
        self.kind_code = columns["kind"]
        self.token_idx = columns["token"]
        self.method_idx = columns["method"]
        self.status = columns["status"]

        self.value_f = np.array([float(v) for v in self.value_exact], dtype=np.float64)
        self.fee_f = np.array([float(v) for v in self.fee_exact], dtype=np.float64)

        self._compute_aggregates()
        self._pair_cache = None
        self._feature_cache = {}
        self._risk_cache = {}

    # -- construction helpers -------------------------------------------------

    def _compute_aggregates(self):
        n = len(self.accounts)
        self.n_tx_out = np.bincount(self.snd, minlength=n).astype(np.int64)
        self.n_tx_in = np.bincount(self.rcv, minlength=n).astype(np.int64)
        self_mask = self.snd == self.rcv
        self.self_tx = np.bincount(self.snd[self_mask], minlength=n).astype(np.int64)
        self.n_tx_total = self.n_tx_out + self.n_tx_in - self.self_tx

        # incident (account, record) map: self-loops appear once
        not_self = ~self_mask
        self.inc_acc = np.concatenate([self.snd, self.rcv[not_self]])
        self.inc_rec = np.concatenate(
            [np.arange(len(self.snd)), np.flatnonzero(not_self)]
        ).astype(np.int64)
        order = np.argsort(self.inc_acc, kind="stable")
        self.inc_acc = self.inc_acc[order]
        self.inc_rec = self.inc_rec[order]
        # offsets such that incident records of account i live in
        # inc_rec[inc_off[i]:inc_off[i+1]]
        self.inc_off = np.searchsorted(self.inc_acc, np.arange(n + 1))

        # every account appears in >= 1 record, so no incident segment is empty
        ts_inc = self.ts[self.inc_rec]
        if n > 0:
            starts = self.inc_off[:-1]
            self.first_seen = np.minimum.reduceat(ts_inc, starts)
            self.last_seen = np.maximum.reduceat(ts_inc, starts)
        else:
            self.first_seen = np.zeros(0, dtype=np.int64)
            self.last_seen = np.zeros(0, dtype=np.int64)

        def _distinct_per_account(values):
            mask = values >= 0
            if not mask.any():
                return np.zeros(n, dtype=np.int64)
            pairs = self.inc_acc[mask].astype(np.int64) * (max(values.max(), 0) + 1) + values[mask]
            uniq = np.unique(pairs)
            accs = uniq // (max(values.max(), 0) + 1)
            return np.bincount(accs, minlength=n).astype(np.int64)

        self.distinct_tokens = _distinct_per_account(self.token_idx[self.inc_rec])
        self.distinct_methods = _distinct_per_account(self.method_idx[self.inc_rec])

    def _pairs(self):
        """Sorted unique (account, counterparty) pairs with interaction counts."""
        if self._pair_cache is None:
            n = len(self.accounts)
            a = np.concatenate([self.snd, self.rcv]).astype(np.int64)
            b = np.concatenate([self.rcv, self.snd]).astype(np.int64)
            keys = a * n + b
            keys.sort()
            uniq, counts = np.unique(keys, return_counts=True)
            acc = uniq // n
            other = uniq % n
            # a self-loop record contributed the (a, a) key twice
            counts = counts.copy()
            counts[acc == other] //= 2
            off = np.searchsorted(acc, np.arange(n + 1))
            self._pair_cache = (acc, other, counts, off)
        return self._pair_cache

    # -- basic properties ------------------------------------------------------

    @property
    def n_accounts(self) -> int:
        return len(self.accounts)

    @property
    def n_transactions(self) -> int:
        return len(self.tx_hash)

    @property
    def latest_timestamp(self) -> int:
        if len(self.ts) == 0:
            return 0
        return int(self.ts.max())

    def has_account(self, address: str) -> bool:
        return address.lower() in self._account_index

    def account_id(self, address: str) -> int:
        idx = self._account_index.get(address.lower())
        if idx is None:
            raise NotFound(f"account {address} not in graph")
        return idx

    # -- queries ---------------------------------------------------------------

    def neighbors(self, address: str, order: int = 1) -> set[str]:
        """Distinct counterparties at hop distance <= order, excluding self."""
        if order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        idx = self.account_id(address)
        acc, other, _, off = self._pairs()
        first = set(other[off[idx]:off[idx + 1]].tolist())
        first.discard(idx)
        result = set(first)
        if order == 2:
            for j in first:
                result.update(other[off[j]:off[j + 1]].tolist())
            result.discard(idx)
        return {self.accounts[i] for i in result}

    def neighbor_ids(self, idx: int) -> np.ndarray:
        acc, other, _, off = self._pairs()
        nb = other[off[idx]:off[idx + 1]]
        return nb[nb != idx]

    def account_summary(self, address: str, labels: LabelBook | None = None) -> AccountNode:
        idx = self.account_id(address)
        addr = self.accounts[idx]
        label = LabelState.unknown
        prov = None
        if labels is not None and addr in labels:
            label = labels.state(addr)
            prov = labels.provenance(addr)
        return AccountNode(
            address=addr,
            first_seen=int(self.first_seen[idx]),
            last_seen=int(self.last_seen[idx]),
            n_tx_in=int(self.n_tx_in[idx]),
            n_tx_out=int(self.n_tx_out[idx]),
            self_tx_count=int(self.self_tx[idx]),
            distinct_tokens=int(self.distinct_tokens[idx]),
            distinct_methods=int(self.distinct_methods[idx]),
            label=label,
            provenance=prov,
        )

    def incident_records(self, idx: int) -> np.ndarray:
        """Row indices of records involving account idx (self-loops once)."""
        return self.inc_rec[self.inc_off[idx]:self.inc_off[idx + 1]]

    def records(self):
        """Reconstruct the canonical record sequence (mainly for tooling/tests)."""
        for i in range(self.n_transactions):
            tok = self.token_idx[i]
            mth = self.method_idx[i]
            yield TransactionRecord(
                tx_hash=self.tx_hash[i],
                block_height=int(self.block[i]),
                timestamp=int(self.ts[i]),
                sender=self.accounts[self.snd[i]],
                receiver=self.accounts[self.rcv[i]],
                native_value=self.value_exact[i],
                fee=self.fee_exact[i],
                kind=_CODE_TO_KIND[int(self.kind_code[i])],
                token_contract=self.tokens[tok] if tok >= 0 else None,
                method_id=self.methods[mth] if mth >= 0 else None,
                sub_index=int(self.sub_index[i]),
                status=int(self.status[i]),
            )

    # -- serialization ---------------------------------------------------------

    def to_bytes(self) -> bytes:
        """Canonical binary container (magic SLGRAPH\\x01, little-endian)."""
        out = io.BytesIO()
        out.write(GRAPH_MAGIC)
        out.write(struct.pack("<IIIQ", len(self.accounts), len(self.tokens),
                              len(self.methods), self.n_transactions))

        def _write_table(strings):
            for s in strings:
                raw = s.encode("utf-8")
                out.write(struct.pack("<H", len(raw)))
                out.write(raw)

        _write_table(self.accounts)
        _write_table(self.tokens)
        _write_table(self.methods)
        for i in range(self.n_transactions):
            raw = self.tx_hash[i].encode("utf-8")
            out.write(struct.pack("<H", len(raw)))
            out.write(raw)
            val = self.value_exact[i]
            fee = self.fee_exact[i]
            out.write(struct.pack(
                "<IQqIIQQQQBiiB",
                int(self.sub_index[i]),
                int(self.block[i]),
                int(self.ts[i]),
                int(self.snd[i]),
                int(self.rcv[i]),
                val & 0xFFFFFFFFFFFFFFFF,
                val >> 64,
                fee & 0xFFFFFFFFFFFFFFFF,
                fee >> 64,
                int(self.kind_code[i]),
                int(self.token_idx[i]),
                int(self.method_idx[i]),
                int(self.status[i]),
            ))
        return out.getvalue()

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())


def load_graph(path) -> LedgerGraph:
    with open(path, "rb") as fh:
        data = fh.read()
    return graph_from_bytes(data)


def graph_from_bytes(data: bytes) -> LedgerGraph:
    if data[: len(GRAPH_MAGIC)] != GRAPH_MAGIC:
        raise ParseError("not a ledger graph container (bad magic)")
    off = len(GRAPH_MAGIC)
    n_acc, n_tok, n_mth, n_rec = struct.unpack_from("<IIIQ", data, off)
    off += struct.calcsize("<IIIQ")

    def _read_table(count):
        nonlocal off
        table = []
        for _ in range(count):
            (ln,) = struct.unpack_from("<H", data, off)
            off += 2
            table.append(data[off:off + ln].decode("utf-8"))
            off += ln
        return table

    accounts = _read_table(n_acc)
    tokens = _read_table(n_tok)
    methods = _read_table(n_mth)
    rec_fmt = "<IQqIIQQQQBiiB"
    rec_size = struct.calcsize(rec_fmt)
    cols = {
        "tx_hash": [], "sub_index": [], "block": [], "ts": [], "snd": [],
        "rcv": [], "value": [], "fee": [], "kind": [], "token": [],
        "method": [], "status": [],
    }
    for _ in range(n_rec):
        (ln,) = struct.unpack_from("<H", data, off)
        off += 2
        cols["tx_hash"].append(data[off:off + ln].decode("utf-8"))
        off += ln
        (sub, blk, ts, snd, rcv, vlo, vhi, flo, fhi,
         kind, tok, mth, status) = struct.unpack_from(rec_fmt, data, off)
        off += rec_size
        cols["sub_index"].append(sub)
        cols["block"].append(blk)
        cols["ts"].append(ts)
        cols["snd"].append(snd)
        cols["rcv"].append(rcv)
        cols["value"].append((vhi << 64) | vlo)
        cols["fee"].append((fhi << 64) | flo)
        cols["kind"].append(kind)
        cols["token"].append(tok)
        cols["method"].append(mth)
        cols["status"].append(status)
    columns = _as_arrays(cols)
    return LedgerGraph(accounts, tokens, methods, columns)


def _as_arrays(cols) -> dict:
    return {
        "tx_hash": cols["tx_hash"],
        "sub_index": np.asarray(cols["sub_index"], dtype=np.int64),
        "block": np.asarray(cols["block"], dtype=np.int64),
        "ts": np.asarray(cols["ts"], dtype=np.int64),
        "snd": np.asarray(cols["snd"], dtype=np.int64),
        "rcv": np.asarray(cols["rcv"], dtype=np.int64),
        "value": list(cols["value"]),
        "fee": list(cols["fee"]),
        "kind": np.asarray(cols["kind"], dtype=np.uint8),
        "token": np.asarray(cols["token"], dtype=np.int64),
        "method": np.asarray(cols["method"], dtype=np.int64),
        "status": np.asarray(cols["status"], dtype=np.uint8),
    }


def ingest(stream, drop_failed: bool = False) -> LedgerGraph:
    """Build a frozen graph from an iterable of TransactionRecord.

    Re-insertion of an identical record is a no-op; a record whose
    (tx_hash, sub_index) key is already present with a different payload
    raises ConflictingRecord. Timestamps must be non-decreasing with block
    height across the whole stream.
    """
    seen: dict[tuple[str, int], tuple] = {}
    records: list[TransactionRecord] = []
    for rec in stream:
        if not isinstance(rec, TransactionRecord):
            raise ParseError(f"expected TransactionRecord, got {type(rec).__name__}")
        if drop_failed and rec.status == 0:
            continue
        payload = rec.payload()
        prior = seen.get(rec.key)
        if prior is not None:
            if prior != payload:
                raise ConflictingRecord(
                    f"tx {rec.tx_hash} sub {rec.sub_index} re-ingested with different payload"
                )
            continue
        seen[rec.key] = payload
        records.append(rec)

    records.sort(key=lambda r: r.key)

    # ordering check: timestamp non-decreasing with block height
    if records:
        by_block: dict[int, list[int]] = {}
        for r in records:
            lohi = by_block.get(r.block_height)
            if lohi is None:
                by_block[r.block_height] = [r.timestamp, r.timestamp]
            else:
                if r.timestamp < lohi[0]:
                    lohi[0] = r.timestamp
                if r.timestamp > lohi[1]:
                    lohi[1] = r.timestamp
        running_max = None
        prev_block = None
        for blk in sorted(by_block):
            lo, hi = by_block[blk]
            if running_max is not None and lo < running_max:
                raise OrderingViolation(
                    f"block {blk} has timestamp {lo} below a timestamp in "
                    f"earlier block {prev_block}"
                )
            if running_max is None or hi > running_max:
                running_max = hi
                prev_block = blk

    addresses = sorted({r.sender for r in records} | {r.receiver for r in records})
    addr_idx = {a: i for i, a in enumerate(addresses)}
    tokens = sorted({r.token_contract for r in records if r.token_contract})
    tok_idx = {t: i for i, t in enumerate(tokens)}
    methods = sorted({r.method_id for r in records if r.method_id})
    mth_idx = {m: i for i, m in enumerate(methods)}

    cols = {
        "tx_hash": [r.tx_hash for r in records],
        "sub_index": [r.sub_index for r in records],
        "block": [r.block_height for r in records],
        "ts": [r.timestamp for r in records],
        "snd": [addr_idx[r.sender] for r in records],
        "rcv": [addr_idx[r.receiver] for r in records],
        "value": [r.native_value for r in records],
        "fee": [r.fee for r in records],
        "kind": [_KIND_TO_CODE[r.kind] for r in records],
        "token": [tok_idx[r.token_contract] if r.token_contract else -1 for r in records],
        "method": [mth_idx[r.method_id] if r.method_id else -1 for r in records],
        "status": [r.status for r in records],
    }
    return LedgerGraph(addresses, tokens, methods, _as_arrays(cols))


# -- record readers ------------------------------------------------------------

_REQUIRED_FIELDS = (
    "tx_hash", "block_height", "timestamp", "sender", "receiver",
    "native_value", "fee", "kind",
)
_OPTIONAL_FIELDS = ("token_contract", "method_id", "sub_index", "status")


def _open_text(path):
    path = str(path)
    if path.endswith(".gz"):
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def _record_from_mapping(obj: dict, line: int) -> TransactionRecord:
    for name in _REQUIRED_FIELDS:
        if name not in obj or obj[name] in (None, ""):
            raise ParseError(f"missing field {name}", line=line)
    try:
        kwargs = {
            "tx_hash": str(obj["tx_hash"]),
            "block_height": int(obj["block_height"]),
            "timestamp": int(obj["timestamp"]),
            "sender": obj["sender"],
            "receiver": obj["receiver"],
            "native_value": int(obj["native_value"]),
            "fee": int(obj["fee"]),
            "kind": TxKind(str(obj["kind"])),
        }
        for name in _OPTIONAL_FIELDS:
            value = obj.get(name)
            if value in (None, ""):
                continue
            if name in ("sub_index", "status"):
                kwargs[name] = int(value)
            else:
                kwargs[name] = str(value)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad record: {exc}", line=line) from exc
    try:
        return TransactionRecord(**kwargs)
    except ParseError as exc:
        if exc.line is None:
            raise ParseError(str(exc), line=line) from exc
        raise


def read_jsonl(path):
    """Yield TransactionRecord from a (possibly gzipped) JSONL file."""
    with _open_text(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=line_no) from exc
            yield _record_from_mapping(obj, line_no)


def read_csv(path):
    """Yield TransactionRecord from a (possibly gzipped) CSV with header."""
    with _open_text(path) as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("missing header row", line=1) from None
        missing = [f for f in _REQUIRED_FIELDS if f not in header]
        if missing:
            raise ParseError(f"header missing fields: {', '.join(missing)}", line=1)
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            obj = dict(zip(header, row))
            yield _record_from_mapping(obj, line_no)


def read_records(path):
    """Dispatch on extension: .jsonl / .csv, optionally .gz compressed."""
    name = str(path)
    base = name[:-3] if name.endswith(".gz") else name
    if base.endswith(".jsonl") or base.endswith(".ndjson"):
        return read_jsonl(path)
    if base.endswith(".csv"):
        return read_csv(path)
    raise ParseError(f"unrecognized transaction file extension: {name}")


def write_jsonl(records, path):
    path = str(path)
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "wt", encoding="utf-8") as fh:
        for r in records:
            obj = {
                "tx_hash": r.tx_hash,
                "block_height": r.block_height,
                "timestamp": r.timestamp,
                "sender": r.sender,
                "receiver": r.receiver,
                "native_value": r.native_value,
                "fee": r.fee,
                "kind": r.kind.value,
            }
            if r.token_contract:
                obj["token_contract"] = r.token_contract
            if r.method_id:
                obj["method_id"] = r.method_id
            if r.sub_index:
                obj["sub_index"] = r.sub_index
            if r.status != 1:
                obj["status"] = r.status
            fh.write(json.dumps(obj, sort_keys=True) + "\n")
