"""Drive the whole workflow through the HTTP API (in-process test client;
`taxbench serve` runs the same app over the network).

Upload, mutate, launch an asynchronous discovery job, poll it, accept a
proposal, export. The UI consumes exactly these endpoints.
"""

import time

from fastapi.testclient import TestClient

from taxbench.service import create_app

client = TestClient(create_app())

content = open("tests/data/iris.csv").read()
created = client.post("/sessions", json={"content": content, "name": "iris"}).json()
sid = created["session_id"]
print(f"session {sid}: {created['row_count']} rows")

client.post(f"/sessions/{sid}/commands", json={"op": "relabel", "concept": "c0", "label": "Iris"})
client.patch(f"/sessions/{sid}/columns", json={"column": "Species", "included": False})

started = client.post(
    f"/sessions/{sid}/concepts/Iris/discover",
    json={"train": {"seed": 4}, "ignore_columns": ["Species"]},
).json()
print("job:", started)
jid = started["job_id"]

while True:
    job = client.get(f"/sessions/{sid}/jobs/{jid}").json()
    print(f"  status={job['status']} progress={job['progress']:.2f}")
    if job["status"] in ("done", "failed"):
        break
    time.sleep(0.1)

proposals = job["result"]
print(f"\n{len(proposals)} proposals; accepting the largest:")
print("  ", proposals[0]["display"])
accepted = client.post(
    f"/sessions/{sid}/proposals/{proposals[0]['id']}", json={"decision": "accept"}
).json()

tree = accepted["taxonomy"]["concepts"]
for node in tree:
    print(f"  {node['id']:<4} {node['label']:<30} {node['extension_size']:>4} rows")

turtle = client.get(f"/sessions/{sid}/export", params={"include_individuals": False}).text
print(f"\nTurtle export: {len(turtle)} bytes")
print("stats:", client.get(f"/sessions/{sid}/stats").json())
