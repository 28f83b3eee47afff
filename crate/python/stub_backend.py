#!/usr/bin/env python3
"""A scripted prediction backend for exercising the line-delimited JSON protocol.

Reads one request per line on stdin and answers on stdout. The --mode flag
picks the behaviour:

  ok           well-formed answers
  overflow     more candidates than the beam
  malformed    a non-JSON line for the first request, then well-formed answers
  wrong-count  subgoal candidates with one value too few
  bad-text     subprogram candidates that do not parse
  error        an error response for every request
  stale        a response with the wrong id before each real one
  no-id        well-formed answers without the id field
  silent       never answers
  crash        exits on the first request

With --log PATH every request is appended to PATH as received.
"""

import argparse
import json
import sys


def subgoal_candidates(req):
    # The task outputs themselves, then the first input of every example.
    outputs = [ex["output"] for ex in req["examples"]]
    first = [next(iter(ex["inputs"].values())) for ex in req["examples"]]
    return [outputs, first]


def subprogram_candidates(req):
    if req["domain"] == "robustfill":
        return ["GetToken(WORD, 1)", "ConstStr('a')", "GetToken(NUMBER, 1)", "ConstStr(' ')"]
    inputs = req["examples"][0]["inputs"]
    n = len(inputs)
    lists = [i for i, v in enumerate(inputs.values()) if "list" in v]
    out = []
    for j in reversed(lists):
        out += [f"x{n} = Sort x{j}", f"x{n} = Reverse x{j}"]
    return out


def answer(req, mode):
    if req["role"] == "subgoal":
        cands = subgoal_candidates(req)
        if mode == "wrong-count":
            cands = [c[:-1] for c in cands]
    else:
        cands = subprogram_candidates(req)
        if mode == "bad-text":
            cands = ["NotAnOperation((("]
    if mode == "overflow":
        return (cands * (req["beam"] + 5))[: req["beam"] + 5]
    return cands[: req["beam"]]


def send(obj):
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--mode", default="ok")
    parser.add_argument("--log")
    args = parser.parse_args()
    seen = 0
    for line in sys.stdin:
        if not line.strip():
            continue
        req = json.loads(line)
        seen += 1
        if args.log:
            with open(args.log, "a") as f:
                f.write(line if line.endswith("\n") else line + "\n")
        mode = args.mode
        if mode == "crash":
            sys.exit(1)
        if mode == "silent":
            continue
        if mode == "malformed" and seen == 1:
            sys.stdout.write("this is not json\n")
            sys.stdout.flush()
            continue
        if mode == "error":
            send({"id": req["id"], "error": "model unavailable"})
            continue
        if mode == "stale":
            send({"id": req["id"] + 1000, "candidates": []})
        resp = {"candidates": answer(req, mode)}
        if mode != "no-id":
            resp["id"] = req["id"]
        send(resp)


if __name__ == "__main__":
    main()
