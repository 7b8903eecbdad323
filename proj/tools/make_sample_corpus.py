#!/usr/bin/env python3
"""Writes data/sample_corpus.jsonl: small branching C functions with the diff
of the commit that last touched them. Deterministic for a given seed."""

import argparse
import difflib
import hashlib
import json
import random

SIMPLE = [
    "r = *p & mask;",
    "flags |= 1 << i;",
    "len = n >> 2;",
    "buf[i] = ~buf[i];",
    "q = malloc(len * sizeof(*q));",
    "free(q);",
    "memcpy(q, buf, len);",
    "r = r ^ key;",
    "c->count++;",
    "write(fd, buf, len);",
    "n = c->size - 1;",
    "r += buf[n];",
    "p = &c->head;",
    "mutex_lock(&c->lock);",
    "mutex_unlock(&c->lock);",
    "log_event(c, r);",
]

CONDS = ["n > 0", "c->state == 3", "!q", "r < len", "flags & 4", "buf[0] == 0", "i != n"]


def stmts(rng, k, ind):
    return [ind + rng.choice(SIMPLE) for _ in range(k)]


def if_else(rng, ind):
    inner = ind + "    "
    return ([f"{ind}if ({rng.choice(CONDS)}) {{"] + stmts(rng, rng.randint(1, 3), inner) +
            [f"{ind}}} else {{"] + stmts(rng, rng.randint(1, 3), inner) + [f"{ind}}}"])


def if_only(rng, ind):
    return [f"{ind}if ({rng.choice(CONDS)})", ind + "    " + rng.choice(["return -1;", "goto out;", "r = 0;"])]


def while_loop(rng, ind):
    inner = ind + "    "
    return [f"{ind}while (i < n) {{"] + stmts(rng, rng.randint(1, 2), inner) + [inner + "i++;", f"{ind}}}"]


def for_loop(rng, ind):
    inner = ind + "    "
    body = stmts(rng, 1, inner)
    if rng.random() < 0.5:
        body += [f"{inner}if ({rng.choice(CONDS)})", inner + "    break;"]
    return [f"{ind}for (i = 0; i < len; i++) {{"] + body + [f"{ind}}}"]


def switch(rng, ind):
    inner = ind + "    "
    out = [f"{ind}switch (c->state) {{"]
    for v in range(rng.randint(2, 3)):
        out.append(f"{ind}case {v}:")
        out += stmts(rng, 1, inner)
        out.append(inner + "break;")
    out += [f"{ind}default:", inner + "r = -1;", f"{ind}}}"]
    return out


def function(rng, idx):
    ind = "    "
    body = [ind + "int r = 0, i = 0, len = n;", ind + "char *q = NULL;"]
    pieces = [if_else] + rng.sample([if_only, while_loop, for_loop, switch, if_else], rng.randint(1, 3))
    rng.shuffle(pieces)
    for make in pieces:
        body += stmts(rng, rng.randint(0, 2), ind)
        body += make(rng, ind)
    uses_out = any("goto out;" in l for l in body)
    if uses_out:
        body += ["out:", ind + "free(q);"]
    body.append(ind + "return r;")
    sig = f"static int handle_{idx:02d}(struct ctx *c, char *buf, unsigned mask, int n, int key, int fd)"
    return [sig, "{"] + body + ["}"]


def mutate(rng, lines):
    """Returns the pre-commit version of `lines`."""
    old = list(lines)
    candidates = [k for k, l in enumerate(lines) if l.strip().endswith(";") and k > 1]
    k = rng.choice(candidates)
    ind = lines[k][: len(lines[k]) - len(lines[k].lstrip())]
    kind = rng.choice(["modify", "add", "remove"])
    if kind == "modify":
        old[k] = ind + rng.choice([s for s in SIMPLE if s != lines[k].strip()])
    elif kind == "add":
        del old[k]
    else:
        old.insert(k, ind + rng.choice(SIMPLE))
    return old


def record(rng, idx):
    preamble = ["#include <stdlib.h>", "#include \"ctx.h\"", ""]
    preamble += [f"static int helper_{idx}_{k}(int x) {{ return x + {k}; }}" for k in range(rng.randint(0, 6))]
    preamble.append("")
    func = function(rng, idx)
    old_func = mutate(rng, func)
    path = f"src/handler_{idx:02d}.c"
    diff = "".join(
        l if l.endswith("\n") else l + "\n"
        for l in difflib.unified_diff(
            [l + "\n" for l in preamble + old_func],
            [l + "\n" for l in preamble + func],
            fromfile="a/" + path,
            tofile="b/" + path,
        )
    )
    commit = hashlib.sha1(f"sample-{idx}".encode()).hexdigest()
    rec = {
        "id": f"sample-{idx:02d}",
        "project": "sample",
        "commit_id": commit,
        "target": rng.randint(0, 1),
        "file_path": path,
        "func_start_line": len(preamble) + 1,
        "func": "\n".join(func) + "\n",
        "diff": f"diff --git a/{path} b/{path}\n" + diff,
    }
    return rec


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("-o", "--output", default="data/sample_corpus.jsonl")
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--seed", type=int, default=20240607)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    recs = [record(rng, i + 1) for i in range(args.count)]
    # a few records exercise estimated anchoring and the no-diff path
    for r in recs[-4:-1]:
        del r["func_start_line"]
    recs[-1]["diff"] = ""
    with open(args.output, "w") as f:
        for r in recs:
            f.write(json.dumps(r) + "\n")


if __name__ == "__main__":
    main()
