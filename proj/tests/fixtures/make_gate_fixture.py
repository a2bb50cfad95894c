#!/usr/bin/env python3
"""Regenerates the 20-question scripted fixture (dataset, provider script,
sandbox script, stub scores). Output is checked in; rerun after edits."""

import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))
DAYS = ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"]


def build():
    items, completions, rules = [], [], []
    for i in range(1, 21):
        tag = f"g{i:02d}"
        n_rows = 3 + i % 5
        boxes = [10 + (i * 7 + r * 3) % 20 for r in range(n_rows)]
        total = sum(boxes)
        items.append({
            "id": tag,
            "category": "arithmetic" if i % 2 else "lookup",
            "table": {"columns": ["Day", "Boxes"], "rows": [[DAYS[r], b] for r, b in enumerate(boxes)]},
            "question": f"[{tag}] How many boxes were sold in total?",
            "answer": str(total),
        })
        # Every fourth CoT answer is off by one, so the second code path runs.
        cot_answer = total + 1 if i % 4 == 0 else total
        code = f"total = df['Boxes'].sum()\nans = total  # {tag}"
        completions += [
            {"role": "CoTA", "contains": f"[{tag}]",
             "response": json.dumps({"solution": f"Add the Boxes column to get {cot_answer}.",
                                     "answer": str(cot_answer)})},
            {"role": "PoTA", "contains": f"[{tag}]", "response": json.dumps({"code": code})},
            {"role": "PDA", "contains": f"[{tag}]", "response": json.dumps({"code": code})},
        ]
        rules.append({"contains": f"# {tag}", "result": {"kind": "value", "payload": str(total)}})

    completions += [
        {"role": "t2SA", "response": json.dumps({"code": "SELECT SUM(Boxes) AS answer FROM dataframe"})},
        {"role": "SDA", "response": json.dumps({"code": "SELECT SUM(Boxes) AS answer FROM dataframe"})},
        {"role": "JA", "response": json.dumps({"answer": "judged"})},
        {"role": "FM", "response": json.dumps({"Extracted_Answer": "short"})},
    ]
    return items, {"completions": completions}, {"rules": rules}, {"default": [0.9, 0.9, 0.9]}


def main():
    items, provider, sandbox, stub = build()
    for name, doc in [("gate_dataset.json", items), ("gate_provider.json", provider),
                      ("gate_sandbox.json", sandbox), ("gate_stub_scores.json", stub)]:
        with open(os.path.join(HERE, name), "w") as f:
            json.dump(doc, f, indent=1)
            f.write("\n")


if __name__ == "__main__":
    main()
