"""Mean-square-deviation traces and their Monte-Carlo aggregation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatchError, WindowTooLargeError

#: Linear MSD below this floor is reported as the dB clamp value.
LINEAR_FLOOR = 1e-32
DB_FLOOR = -320.0


def to_db(linear) -> np.ndarray:
    """10 log10 of linear values, clamped at the floor to keep logs finite."""
    lin = np.asarray(linear, dtype=np.float64)
    with np.errstate(divide="ignore"):
        vals = 10.0 * np.log10(np.maximum(lin, LINEAR_FLOOR))
    return np.where(lin < LINEAR_FLOOR, DB_FLOOR, vals)


@dataclass(frozen=True, eq=False)
class MsdTrace:
    """Per-iteration network MSD of one algorithm.

    ``linear`` has T+1 entries (iteration 0 is the initial state);
    ``db`` is its clamped decibel image. ``per_node`` optionally holds the
    (T+1, N) per-node squared deviations. ``run_index`` identifies a
    single-run trace and is None after averaging.
    """

    label: str
    linear: np.ndarray
    db: np.ndarray
    run_count: int
    run_index: int | None = None
    per_node: np.ndarray | None = None

    @property
    def iterations(self) -> int:
        return len(self.linear) - 1


def make_trace(
    label: str,
    linear,
    *,
    run_count: int = 1,
    run_index: int | None = None,
    per_node=None,
) -> MsdTrace:
    lin = np.asarray(linear, dtype=np.float64)
    pn = None if per_node is None else np.asarray(per_node, dtype=np.float64)
    return MsdTrace(
        label=label,
        linear=lin,
        db=to_db(lin),
        run_count=run_count,
        run_index=run_index,
        per_node=pn,
    )


def per_node_squared_errors(states, w_star: np.ndarray) -> np.ndarray:
    """Squared deviation ||w_k - w_star_k||^2 per node, as a length-N array."""
    errs = np.column_stack([s.w for s in states]) - w_star
    return (errs * errs).sum(axis=0)


def network_msd(states, w_star: np.ndarray) -> tuple[float, float]:
    """Average squared deviation over nodes, in linear and dB form."""
    sq = per_node_squared_errors(states, w_star)
    lin = float(sq.mean())
    return lin, float(to_db(lin))


def average_traces(traces: list[MsdTrace]) -> MsdTrace:
    """Pointwise linear-domain mean of single-run traces.

    Callers must pass traces in ascending run order; the accumulation runs
    in that order so averaged results are bit-reproducible. dB values are
    recomputed from the averaged linear values, never averaged themselves.
    """
    if not traces:
        raise ValueError("no traces to average")
    first = traces[0]
    for t in traces[1:]:
        if len(t.linear) != len(first.linear):
            raise LengthMismatchError(
                f"trace lengths differ: {len(t.linear)} vs {len(first.linear)}"
            )
        if t.label != first.label:
            raise ValueError(f"trace labels differ: {t.label!r} vs {first.label!r}")
    indices = [t.run_index for t in traces]
    if any(i is None for i in indices) or any(
        b <= a for a, b in zip(indices, indices[1:])
    ):
        raise ValueError("traces must carry strictly ascending run_index values")

    acc = np.zeros_like(first.linear)
    for t in traces:
        acc += t.linear
    linear = acc / len(traces)

    per_node = None
    if all(t.per_node is not None for t in traces):
        acc_pn = np.zeros_like(first.per_node)
        for t in traces:
            acc_pn += t.per_node
        per_node = acc_pn / len(traces)

    return make_trace(
        first.label,
        linear,
        run_count=sum(t.run_count for t in traces),
        run_index=None,
        per_node=per_node,
    )


def default_steady_state_window(iterations: int) -> int:
    """Final 10% of the trace, at least 50 samples, capped at its length."""
    return max(1, min(iterations + 1, max(50, iterations // 10)))


def steady_state_msd(trace: MsdTrace, window: int) -> float:
    """Mean linear MSD over the final ``window`` trace entries, in dB."""
    if window < 1:
        raise ValueError("window must be >= 1")
    if window > len(trace.linear):
        raise WindowTooLargeError(
            f"window {window} exceeds trace length {len(trace.linear)}"
        )
    return float(to_db(float(trace.linear[-window:].mean())))
