#!/usr/bin/env python3
"""Writes e2e.json: 5 bootstrap members plus one voted in, 20 bottles with two
custody hops each, then 20 consumer purchases."""

import json
import pathlib

RECORDS = 20
CONSUMERS = ["alice", "bob", "carol", "dave"]

members = [
    {"id": "cellar", "role": "winemaker", "administrator": True},
    {"id": "estate", "role": "winemaker"},
    {"id": "haulier", "role": "participant"},
    {"id": "importer", "role": "participant"},
    {"id": "retailer", "role": "participant"},
    {"id": "bottler", "role": "participant", "bootstrap": False},
]

steps = [
    {"at": 0, "actor": "cellar", "action": "onboard", "id": "admit-bottler",
     "params": {"member": "bottler", "approvers": ["cellar", "estate", "haulier"]}},
]
for i in range(RECORDS):
    wine = f"cuvee-{i:02d}"
    maker = "cellar" if i % 2 == 0 else "estate"
    first, second = ("haulier", "retailer") if i % 3 else ("bottler", "importer")
    steps.append({"actor": maker, "action": "create_record", "id": f"create-{wine}",
                  "params": {"wine_id": wine, "pedigree": {"vintage": 2015 + i % 6, "lot": i}}})
    for hop in (first, second):
        steps.append({"actor": hop, "action": "validate", "params": {"wine_id": wine}})
        steps.append({"actor": hop, "action": "accept", "params": {"wine_id": wine}})
for i in range(RECORDS):
    steps.append({"actor": CONSUMERS[i % len(CONSUMERS)], "action": "purchase",
                  "params": {"wine_id": f"cuvee-{i:02d}"}})

expectations = [
    {"type": "step_result", "step": "admit-bottler", "field": "state", "equals": "admitted"},
    {"type": "registry_size", "equals": 6},
    {"type": "validator_count", "equals": 6},
    {"type": "is_validator", "member": "bottler"},
    {"type": "record_count", "equals": RECORDS},
    {"type": "record_count", "status": "sold", "equals": RECORDS},
    {"type": "counters_consistent"},
    {"type": "no_attacks"},
    {"type": "replicas_agree"},
]
expectations += [{"type": "write_count", "wine_id": f"cuvee-{i:02d}", "equals": 4} for i in range(RECORDS)]

scenario = {
    "name": "e2e",
    "seed": 2024,
    "members": members,
    "consumers": CONSUMERS,
    "steps": steps,
    "settle": 20,
    "expectations": expectations,
}

out = pathlib.Path(__file__).with_name("e2e.json")
out.write_text(json.dumps(scenario, indent=1) + "\n")
