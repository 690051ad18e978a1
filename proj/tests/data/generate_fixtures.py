#!/usr/bin/env python3
"""Regenerates the CloudSys test fixtures.

CloudSys is a synthetic cloud-service log corpus in the loghub-2k structured
format (LineId, Content, EventId, EventTemplate). Templates are constructed so
that distinct events stay distinct under token-mask matching:

  * within an arity class every template has a unique leading literal,
  * two same-arity templates never share half or more literal positions,
  * variable values always carry digits, so they cannot collide with the
    purely alphabetic literals.

Run from the repository root:  python3 tests/data/generate_fixtures.py
"""

import csv
import hashlib
import json
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))

# (event id, template, list of per-variable value generators)
# Generators are cycled deterministically; every value contains a digit.


def cyc(values):
    def gen(i):
        return values[i % len(values)]
    return gen


def counter(prefix):
    def gen(i):
        return f"{prefix}{i}"
    return gen


IPS = cyc(["10.0.0.1", "10.0.0.2", "192.168.4.17", "172.16.9.30", "10.12.0.254"])
HOSTS = cyc(["node-01:9092", "node-02:9092", "node-07:2181", "edge-3:8042"])
HEXIDS = cyc(["0x7f3a9c04", "0x00ffd812", "0x1b7e4450", "0xdeadbeef"])
PATHS = cyc(["/var/data/seg_0012.db", "/var/data/seg_0047.db", "/tmp/spool/chunk9",
             "/mnt/vol2/blob_771"])
PCTS = cyc(["0.91", "0.87", "0.995", "0.42"])
MS = cyc(["12ms", "340ms", "7ms", "1250ms"])
USERS = cyc(["u1042", "u2207", "u88", "u5130"])
BLOCKS = cyc(["blk_4021", "blk_77", "blk_90210", "blk_333"])
SIZES = cyc(["1024", "65536", "8192", "262144"])
NUMS = counter("")
TASKS = cyc(["t_491", "t_002", "t_873"])
QUERIES = cyc(["q_17", "q_58", "q_341"])
SECS = cyc(["0.42s", "1.05s", "0.08s"])
VOLS = cyc(["vol-7", "vol-23", "vol-104"])
VOL2 = cyc(["ebs 42", "ebs 360", "nvme 9"])  # two tokens: one placeholder, two tokens
LEASES = cyc(["lease-42", "lease-97", "lease-13"])
SHARDS = cyc(["shard-12", "shard-3"])
ROUNDS = counter("")
REGIONS = cyc(["r_44", "r_109"])

TEMPLATES = [
    ("E01", "Heartbeat <*>", [counter("17")]),
    ("E02", "Rebalancing shards", []),
    ("E03", "Checkpoint <*>", [HEXIDS]),
    ("E04", "Connected to <*>", [HOSTS]),
    ("E05", "Disconnected from <*>", [HOSTS]),
    ("E06", "Promoting replica <*>", [SHARDS]),
    ("E07", "Compacting segment <*>", [PATHS]),
    ("E08", "GC pause <*>", [MS]),
    ("E09", "Dropping packet <*>", [HEXIDS]),
    ("E10", "Worker <*> idle", [NUMS]),
    ("E11", "Applying snapshot <*>", [HEXIDS]),
    ("E12", "Election timeout expired", []),
    ("E13", "Opened session <*> successfully", [USERS]),
    ("E14", "Closed connection <*> gracefully", [IPS]),
    ("E15", "Leader election round <*>", [ROUNDS]),
    ("E16", "Replica lag is <*>", [MS]),
    ("E17", "Node <*> joined cluster", [HOSTS]),
    ("E18", "Spilling <*> rows locally", [SIZES]),
    ("E19", "Retrying request <*> shortly", [QUERIES]),
    ("E20", "Quorum lost on partition <*>", [NUMS]),
    ("E21", "Flushing memtable to <*>", [PATHS]),
    ("E22", "Failed to connect to <*>", [IPS]),
    ("E23", "Received block <*> size <*>", [BLOCKS, SIZES]),
    ("E24", "User <*> login from <*>", [USERS, IPS]),
    ("E25", "Deleting temporary file <*> now", [PATHS]),
    ("E26", "Cache hit ratio at <*>", [PCTS]),
    ("E27", "Renewing lease <*> for <*>", [LEASES, USERS]),
    ("E28", "Mounting volume <*>", [VOLS]),
    ("E29", "Executing query <*> <*>", [QUERIES, SECS]),
    ("E30", "Verifying checksum of block <*>", [BLOCKS]),
    ("E31", "Throttling client <*> for <*>", [USERS, MS]),
    ("E32", "Snapshot upload took <*>", [MS]),
    ("E33", "Evicting cold page <*>", [HEXIDS]),
    ("E34", "Authentication failure for <*>", [USERS]),
    ("E35", "Serving range scan <*>", [QUERIES]),
    ("E36", "Index rebuild finished in <*>", [SECS]),
    ("E37", "Replaying journal entry <*>", [NUMS]),
    ("E38", "Backpressure engaged at depth <*>", [SIZES]),
    ("E39", "Rotating audit logfile <*>", [PATHS]),
    ("E40", "Peer <*> acknowledged term <*>", [HOSTS, ROUNDS]),
    ("E41", "Mirroring region <*> to <*>", [REGIONS, HOSTS]),
    ("E42", "Fsync latency above <*>", [MS]),
    ("E43", "Trimming WAL before offset <*>", [SIZES]),
    ("E44", "Downgrading peer <*> after timeout", [HOSTS]),
    ("E45", "Publishing metrics batch <*>", [NUMS]),
    ("E46", "Draining task queue <*>", [TASKS]),
    ("E47", "Admitting tenant <*> quota <*>", [USERS, SIZES]),
    ("E48", "Scrubbing object store bucket <*>", [NUMS]),
]

# E28 additionally emits two-token values (one placeholder, two raw tokens).
MULTI_TOKEN_EVENT = "E28"


def instantiate(template, gens, occurrence, wide=False):
    out = []
    var_index = 0
    for token in template.split(" "):
        if token == "<*>":
            gen = gens[var_index]
            if wide and var_index == 0:
                out.append(VOL2(occurrence))
            else:
                out.append(gen(occurrence))
            var_index += 1
        else:
            out.append(token)
    return " ".join(out)


def validate(templates):
    """Token-mask separation checks; see module docstring."""
    by_arity = {}
    for eid, template, gens in templates:
        arity = len(template.split(" "))
        by_arity.setdefault(arity, []).append((eid, template.split(" ")))
    for arity, entries in by_arity.items():
        firsts = [tokens[0] for _, tokens in entries]
        assert len(set(firsts)) == len(firsts), f"duplicate leading literal in arity {arity}"
        for i, (eid_a, a) in enumerate(entries):
            for eid_b, b in entries:
                if eid_a == eid_b:
                    continue
                shared = sum(1 for x, y in zip(a, b)
                             if x == y and x != "<*>")
                assert shared * 2 < arity, f"{eid_a} and {eid_b} share {shared}/{arity} literals"
    for eid, template, gens in templates:
        for token in template.split(" "):
            if token != "<*>":
                assert not any(ch.isdigit() for ch in token), f"{eid} literal has a digit"


def build_rows():
    validate(TEMPLATES)
    rng = random.Random(20240611)
    rows = []
    occurrences = {eid: 0 for eid, _, _ in TEMPLATES}

    def emit(eid, template, gens, wide=False):
        occ = occurrences[eid]
        occurrences[eid] += 1
        content = instantiate(template, gens, occ, wide=wide)
        rows.append((content, eid, template))

    # First 200 lines: introduce 40 distinct templates early (ICL sampling
    # draws from the first 10%), interleaved with repeats.
    first_wave = TEMPLATES[:40]
    for i in range(200):
        if i % 5 < 4 and i // 5 * 4 + i % 5 < len(first_wave) * 5:
            idx = (i * 7) % len(first_wave)
        else:
            idx = rng.randrange(len(first_wave))
        eid, template, gens = first_wave[idx]
        emit(eid, template, gens)

    # Make sure every first-wave template actually appeared.
    seen = {eid for _, eid, _ in rows}
    missing = [t for t in first_wave if t[0] not in seen]
    for offset, (eid, template, gens) in enumerate(missing):
        pos = 3 + offset * 4
        occ = occurrences[eid]
        occurrences[eid] += 1
        rows[pos] = (instantiate(template, gens, occ), eid, template)

    # Remaining lines: all 48 templates with a skewed distribution, plus the
    # two-token variant of E28 sprinkled in.
    weights = [rng.randint(1, 12) for _ in TEMPLATES]
    while len(rows) < 2000:
        idx = rng.choices(range(len(TEMPLATES)), weights=weights, k=1)[0]
        eid, template, gens = TEMPLATES[idx]
        wide = eid == MULTI_TOKEN_EVENT and occurrences[eid] % 3 == 2
        emit(eid, template, gens, wide=wide)

    return rows[:2000]


def write_structured(rows):
    path = os.path.join(HERE, "CloudSys_2k.log_structured.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["LineId", "Content", "EventId", "EventTemplate"])
        for i, (content, eid, template) in enumerate(rows, start=1):
            writer.writerow([i, content, eid, template])
    print(f"wrote {path}")


REMOTE_TEMPLATES = [
    ("Renewing lease <*> for <*>", [LEASES, USERS]),
    ("Connected to <*>", [HOSTS]),
    ("GC pause <*>", [MS]),
    ("Opened session <*> successfully", [USERS]),
    ("Failed to connect to <*>", [IPS]),
    ("Cache hit ratio at <*>", [PCTS]),
    ("Publishing metrics batch <*>", [NUMS]),
    ("Rebalancing shards", []),
]

# The response for this query is deliberately misaligned to exercise the
# retry -> heuristic fallback.
MALFORMED_QUERY_INDEX = 2


def remote_response(template, reasoning_seed):
    lines = [
        "Looking at the message, the changing fields are identifiers and numbers.",
        f"(analysis pass {reasoning_seed})",
        template,
    ]
    return "\n".join(lines)


def write_remote_session():
    rng = random.Random(777)
    lines = []
    for i in range(50):
        template, gens = REMOTE_TEMPLATES[i % len(REMOTE_TEMPLATES)]
        lines.append((instantiate(template, gens, i // len(REMOTE_TEMPLATES) + rng.randrange(3)),
                      template))

    log_path = os.path.join(HERE, "remote_session.log")
    with open(log_path, "w") as fh:
        for content, _ in lines:
            fh.write(content + "\n")
    print(f"wrote {log_path}")

    # One response per distinct content; the malformed override goes last so a
    # repeated line cannot mask it.
    responses = {}
    order = []
    for i, (content, template) in enumerate(lines):
        if content not in responses:
            order.append(content)
        responses[content] = remote_response(template, i % 4)
    malformed_content = lines[MALFORMED_QUERY_INDEX][0]
    responses[malformed_content] = "Template:\nCompletely unrelated answer text"

    jsonl_path = os.path.join(HERE, "remote_session_responses.jsonl")
    with open(jsonl_path, "w") as fh:
        for content in order:
            fh.write(json.dumps({"query": content, "response": responses[content]}) + "\n")
    print(f"wrote {jsonl_path}")


if __name__ == "__main__":
    rows = build_rows()
    write_structured(rows)
    write_remote_session()
