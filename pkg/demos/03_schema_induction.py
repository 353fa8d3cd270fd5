#!/usr/bin/env python3
"""Bottom-up taxonomy induction over entity types.

Starting from six concrete food types, a hypernym prompt groups each
cluster's types under parents, parents are merged and re-clustered, and the
loop repeats until a single hypernym tops a single cluster.
"""

import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from textkg.authoring import RecordingBackend, parse_numbered, user_sections
from textkg.prompts import TemplateSet
from textkg.schema import infer_schema

PARENTS = {
    "legumes": "vegetables",
    "green vegetables": "vegetables",
    "pork": "meat",
    "poultry": "meat",
    "fish": "seafood",
    "crustacean": "seafood",
    "vegetables": "food",
    "meat": "food",
    "seafood": "food",
}


def scripted_model(request):
    labels = parse_numbered(user_sections(request)["types"])
    by_parent = {}
    for index, label in enumerate(labels, 1):
        by_parent.setdefault(PARENTS[label.casefold()], []).append(index)
    return "\n".join(
        f"{parent} | is type of | " + "; ".join(f"({i}) {labels[i - 1]}" for i in indexes)
        for parent, indexes in sorted(by_parent.items())
    )


types = ["legumes", "green vegetables", "poultry", "pork", "fish", "crustacean"]
print(f"level-0 types: {types}\n")

schema = infer_schema([sorted(types)], RecordingBackend(scripted_model), TemplateSet.load())
schema.validate()

print(f"inferred a {schema.levels}-level taxonomy rooted at {schema.root.label!r}:\n")


def tree(node, indent=0):
    print("  " * indent + node.label)
    for edge in sorted(schema.edges, key=lambda e: e.child.label):
        if edge.parent == node:
            tree(edge.child, indent + 1)


tree(schema.root)

print("\nas N-Triples:")
print(schema.to_ntriples(), end="")
