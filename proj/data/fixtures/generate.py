#!/usr/bin/env python3
"""Writes the synthetic metrics streams and per-call logs used by the accounting tests.

Statement runs use the version-1 layout (no lean_check/agent_result events,
no schema_version); proof runs use version 2. Token totals are attached either
as agent_result fields or as a separate task_tokens backfill run.

    python3 generate.py [out_dir]
"""

import json
import random
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

SEED = 20260114

# corpus, targets, solved, V, Q, tokens, attempts total (statement runs only)
STATEMENT_ROWS = [
    ("real_analysis", 416, 176, 20429061),
    ("convex_analysis", 560, 45, 28421469),
    ("article", 67, 14, 2875173),
]
PROOF_ROWS = [
    # corpus, targets, solved, V, Q, tokens, token source
    ("real_analysis", 339, 339, 628, 1263, 140040564, "agent_result"),
    ("convex_analysis", 499, 499, 1065, 2001, 307966089, "backfill"),
    ("article", 37, 37, 77, 148, 16362141, "agent_result"),
    ("fate_h_auto", 100, 96, 283, 339, 44177658, "backfill"),
    ("fate_h_lemma_map", 100, 97, 368, 479, 53766276, "agent_result"),
]


class Clock:
    def __init__(self):
        self.t = datetime(2026, 1, 14, 17, 0, 0, tzinfo=timezone.utc)

    def tick(self):
        self.t += timedelta(milliseconds=137)
        return self.t.isoformat(timespec="microseconds")


def line(clock, run_id, event, data):
    return json.dumps({"ts": clock.tick(), "run_id": run_id, "event": event, "data": data},
                      ensure_ascii=False, sort_keys=True)


def spread(rng, total, n, low=0, high=None):
    """n integers in [low, high] summing to total."""
    values = [low] * n
    rest = total - low * n
    assert rest >= 0
    while rest > 0:
        i = rng.randrange(n)
        if high is not None and values[i] >= high:
            continue
        values[i] += 1
        rest -= 1
    return values


def split_tokens(rng, total, n):
    cuts = sorted(rng.sample(range(1, total), n - 1))
    bounds = [0] + cuts + [total]
    return [b - a for a, b in zip(bounds, bounds[1:])]


def statement_runs(rng, clock, corpus, items, attempts_total):
    """Version-1 stream, resumed once halfway."""
    b = spread(rng, attempts_total, items, 0, 3)
    half = items // 2
    out = []
    for part, (lo, hi) in enumerate([(0, half), (half, items)]):
        run_id = f"skeleton_{corpus}_part{part + 1}"
        out.append(line(clock, run_id, "run_start", {"pipeline": "skeleton", "corpus": corpus}))
        for i in range(lo, hi):
            out.append(line(clock, run_id, "item_start", {"index": i, "label": f"{corpus}:{i}"}))
            out.append(line(clock, run_id, "item_end",
                            {"index": i, "label": f"{corpus}:{i}", "status": "compiled", "b_attempts": b[i]}))
        if hi == items:
            out.append(line(clock, run_id, "project_check", {"ok": True}))
        out.append(line(clock, run_id, "run_end", {"pipeline": "skeleton", "processed": hi - lo}))
    return out, b


def statement_run_v2(rng, clock, corpus, items, attempts):
    """Same items in the version-2 layout with explicit lean_check lines."""
    run_id = f"skeleton_{corpus}_v2"
    out = [line(clock, run_id, "run_start", {"schema_version": 2, "pipeline": "skeleton", "stage": 1})]
    for i in range(items):
        out.append(line(clock, run_id, "agent_result", {"agent": "s", "task": str(i), "ok": True}))
        out.append(line(clock, run_id, "lean_check", {"file": "f.lean", "ok": attempts[i] == 0}))
        for k in range(attempts[i]):
            out.append(line(clock, run_id, "agent_result", {"agent": "b", "task": str(i), "ok": True}))
            out.append(line(clock, run_id, "lean_check", {"file": "f.lean", "ok": k + 1 == attempts[i]}))
        out.append(line(clock, run_id, "item_end", {"stage": 1, "index": i, "status": "compiled",
                                                   "b_attempts": attempts[i]}))
    out.append(line(clock, run_id, "project_check", {"ok": True}))
    out.append(line(clock, run_id, "run_end", {"pipeline": "skeleton"}))
    return out


def backfill_run(rng, clock, corpus, stage_tag, tasks, total):
    run_id = f"token_backfill_{corpus}_{stage_tag}"
    out = [line(clock, run_id, "run_start", {"schema_version": 2, "pipeline": "token_backfill"})]
    for task, tokens in zip(tasks, split_tokens(rng, total, len(tasks))):
        a = rng.randrange(0, tokens + 1)
        out.append(line(clock, run_id, "task_tokens", {
            "stage": stage_tag, "task": task, "tokens_used_total": tokens,
            "tokens_used_by_agent": {"a": a, "c": tokens - a}, "log_file_count": 2}))
    out.append(line(clock, run_id, "run_end", {"pipeline": "token_backfill", "total_tokens_used": total}))
    return out


def proof_run(rng, clock, corpus, targets, solved, v_total, q_total, tokens, source):
    run_id = f"proof_stage2_{corpus}"
    # Per target: verifier calls v_i >= 1 and oracle calls q_i = plans_i + v_i.
    v = spread(rng, v_total, targets, 1)
    plans = spread(rng, q_total - v_total, targets, 1 if q_total - v_total >= targets else 0)
    q = [a + b for a, b in zip(v, plans)]
    per_call = split_tokens(rng, tokens, q_total) if source == "agent_result" else None
    unsolved = set(rng.sample(range(targets), targets - solved))
    out = [line(clock, run_id, "run_start", {"schema_version": 2, "pipeline": "proof", "stage": 2,
                                             "corpus": corpus})]
    call = 0
    for i in range(targets):
        out.append(line(clock, run_id, "item_start", {"index": i, "label": f"{corpus}:{i}"}))
        for k in range(q[i]):
            agent = "c" if k < plans[i] else "a"
            data = {"agent": agent, "task": str(i), "ok": True}
            if per_call is not None:
                data["tokens_used"] = per_call[call]
            elif k == 0:
                # Direct counts exist but are incomplete; the backfill is canonical.
                data["tokens_used"] = 1000
            call += 1
            out.append(line(clock, run_id, "agent_result", data))
            if agent == "a":
                out.append(line(clock, run_id, "lean_check", {"file": f"{corpus}.lean", "ok": True}))
        status = "unsolved" if i in unsolved else "solved"
        out.append(line(clock, run_id, "item_end", {
            "stage": 2, "index": i, "label": f"{corpus}:{i}", "status": status, "attempts": v[i],
            "verifier_calls": v[i], "errors_after": 0, "proof_lines": 1 + (i % 7)}))
    out.append(line(clock, run_id, "project_check", {"ok": True}))
    out.append(line(clock, run_id, "run_end", {"pipeline": "proof"}))
    if source == "backfill":
        out += backfill_run(rng, clock, corpus, "final", [str(i) for i in range(targets)], tokens)
    return out


def per_call_logs(out):
    """Two logs of one task, as in the backfill example record."""
    d = out / "logs" / "backfill_example"
    d.mkdir(parents=True, exist_ok=True)
    logs = [("final_agent_a_0_L119_000000.log", "a", 34170), ("final_agent_c_0_L119_000001.log", "c", 31661)]
    manifest = []
    for name, agent, tokens in logs:
        (d / name).write_text(f"STDOUT:\nagent {agent} reply\nSTDERR:\n\ntokens used\n{tokens:,}\n")
        manifest.append(json.dumps({"log": name, "stage": "final", "agent": agent, "task": "0_L119",
                                    "lean_file": "FormalBook/Chapters/Chap01/section01.lean"}))
    (d / "index.jsonl").write_text("\n".join(manifest) + "\n")


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent
    rng = random.Random(SEED)
    clock = Clock()
    metrics = out / "metrics"
    metrics.mkdir(parents=True, exist_ok=True)
    manifest = []
    expected = []

    for corpus, items, attempts_total, tokens in STATEMENT_ROWS:
        stream, attempts = statement_runs(rng, clock, corpus, items, attempts_total)
        stream += backfill_run(rng, clock, corpus, "stage1", [str(i) for i in range(items)], tokens)
        (metrics / f"{corpus}_stage1.jsonl").write_text("\n".join(stream) + "\n")
        manifest.append({"corpus": corpus, "stage": 1, "metrics": [f"metrics/{corpus}_stage1.jsonl"]})
        expected.append({"corpus": corpus, "stage": 1, "targets": items, "solved": items,
                         "verifier_calls": items + attempts_total, "oracle_calls": items + attempts_total,
                         "tokens": tokens})
        if corpus == "real_analysis":
            v2 = statement_run_v2(rng, clock, corpus, items, attempts)
            (metrics / f"{corpus}_stage1_v2.jsonl").write_text("\n".join(v2) + "\n")

    for corpus, targets, solved, v, q, tokens, source in PROOF_ROWS:
        stream = proof_run(rng, clock, corpus, targets, solved, v, q, tokens, source)
        (metrics / f"{corpus}_stage2.jsonl").write_text("\n".join(stream) + "\n")
        manifest.append({"corpus": corpus, "stage": 2, "metrics": [f"metrics/{corpus}_stage2.jsonl"]})
        expected.append({"corpus": corpus, "stage": 2, "targets": targets, "solved": solved,
                         "verifier_calls": v, "oracle_calls": q, "tokens": tokens})

    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    (out / "expected.json").write_text(json.dumps(expected, indent=1) + "\n")
    per_call_logs(out)


if __name__ == "__main__":
    main()
