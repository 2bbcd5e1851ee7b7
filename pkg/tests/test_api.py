"""
HTTP API.
"""


def test_health(client):
    assert client.get("/health").json() == {"status": "ok", "service": "seirkit"}
    status = client.get("/api/v1/status").json()
    assert status["status"] == "ok" and status["service"] == "seirkit"


def test_analyze(client, seir_document):
    response = client.post("/api/v1/analyze", json={"document": seir_document, "which": ["r0", "final-size"]})
    assert response.status_code == 200
    body = response.json()
    assert abs(body["r0"] - 1.8) < 1e-12
    assert body["formulas"]["final-size"] == "1 - z = exp(-R0 z)"


def test_analyze_rejects_unsupported_quantities(client, seir_document):
    response = client.post("/api/v1/analyze", json={"document": seir_document, "which": ["ncrit"]})
    assert response.status_code == 400
    assert "SIR-demography" in response.json()["detail"]


def test_schema_errors_are_422(client, seir_document):
    assert client.post("/api/v1/analyze", json={"document": {**seir_document, "extra": 1}}).status_code == 422
    assert client.post("/api/v1/analyze", json={"document": seir_document, "which": ["bogus"]}).status_code == 422


def test_simulate(client, reed_frost_document):
    response = client.post("/api/v1/simulate", json={"document": reed_frost_document, "replicas": 20, "seed": 4})
    assert response.status_code == 200
    body = response.json()
    assert body["summary"]["replicas"] == 20
    assert [o["replica_index"] for o in body["outcomes"]] == list(range(20))


def test_simulate_is_bounded(client, reed_frost_document):
    response = client.post("/api/v1/simulate", json={"document": reed_frost_document, "replicas": 10_001})
    assert response.status_code == 400


def test_simulate_rejects_bad_methods(client, reed_frost_document):
    response = client.post("/api/v1/simulate", json={"document": reed_frost_document, "method": "markov"})
    assert response.status_code == 400


def test_validate(client, reed_frost_document):
    response = client.post("/api/v1/validate",
                           json={"document": reed_frost_document, "suite": "wald", "replicas": 200})
    assert response.status_code == 200
    body = response.json()
    assert body["passed"] is True and body["suite"] == "wald"
