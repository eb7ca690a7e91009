import httpx
import pytest
import pytest_asyncio

from app.main import app, lifespan


@pytest.fixture(
    scope="session"
)  # I add the following fixture to configure asyncio in pytest
def anyio_backend():
    return "asyncio"


@pytest.fixture(scope="session")
async def client():
    async with lifespan(app):  # lifespan does not return the asgi app
        transport = httpx.ASGITransport(app=app)  # type:ignore
        async with httpx.AsyncClient(
            transport=transport, base_url="http://localhost"
        ) as client:
            yield client


@pytest_asyncio.fixture(scope="session")
async def static_response(client):
    return await client.post("/static-solve", json={})


@pytest.mark.order(101)
@pytest.mark.asyncio
async def test_health(client):
    response = await client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


@pytest.mark.order(102)
@pytest.mark.asyncio
async def test_static_solve_is_ok(static_response):
    assert static_response.status_code == 200
    body = static_response.json()
    assert body["jammer_pos"] == pytest.approx(50 / 3)
    assert body["receiver_strategy"]["support"] == [10.0, 50.0]
    assert sum(body["receiver_strategy"]["probs"]) == pytest.approx(1.0)


@pytest.mark.order(103)
@pytest.mark.asyncio
async def test_static_solve_with_noise(client):
    scenario = {"l": 10.0, "m": 1000.0, "noise_density_dbm_hz": -174.0}
    response = await client.post("/static-solve", json={"scenario": scenario})
    assert response.status_code == 200
    assert 10.0 < response.json()["jammer_pos"] < 20.0


@pytest.mark.order(104)
@pytest.mark.asyncio
async def test_stackelberg_needs_noise_free_game(client):
    scenario = {"l": 10.0, "m": 1000.0, "noise_density_dbm_hz": -174.0}
    response = await client.post("/static-solve", json={"scenario": scenario, "leader": "J"})
    assert response.status_code == 400


@pytest.mark.order(105)
@pytest.mark.asyncio
async def test_oracle_static(client):
    response = await client.post("/oracle/static", json={"n_points": 41})
    assert response.status_code == 200
    body = response.json()
    assert body["lower_bound"] <= body["value"] <= body["upper_bound"]
    assert body["receiver_support"][0] == 10.0


@pytest.mark.order(106)
@pytest.mark.asyncio
async def test_oracle_g1(client):
    response = await client.post("/oracle/g1", json={"n_positions": 5, "max_step": 1, "gamma": 0.5})
    assert response.status_code == 200
    body = response.json()
    assert body["converged"]
    assert len(body["values"]) == 5
    assert len(body["values"][0][0]) == 2


@pytest.mark.order(107)
@pytest.mark.asyncio
async def test_oracle_g2(client):
    response = await client.post("/oracle/g2", json={"n_positions": 3, "max_step": 1, "gamma": 0.5})
    assert response.status_code == 200
    assert response.json()["average_payoff"] >= 0.0


@pytest.mark.order(108)
@pytest.mark.asyncio
async def test_oracle_rejects_bad_input(client):
    assert (await client.post("/oracle/g3", json={})).status_code == 422
    assert (await client.post("/oracle/g1", json={"gamma": 1.0})).status_code == 422


@pytest.mark.order(109)
@pytest.mark.asyncio
async def test_simulate(client):
    payload = {"game": "g2", "total_steps": 2000, "seed": 7, "grid": {"n_positions": 5}}
    response = await client.post("/simulate", json=payload)
    assert response.status_code == 200
    body = response.json()
    assert body["run"] == "g2-tabular-tabular-seed7"
    assert body["total_steps"] == 2000
    assert sum(map(sum, body["occupancy"])) == pytest.approx(1.0)


@pytest.mark.order(110)
@pytest.mark.asyncio
@pytest.mark.parametrize(
    "payload",
    [
        {"agent_r": "greedy", "total_steps": 10},
        {"game": "g3", "agent_j": "mixed", "total_steps": 10},
        {"total_steps": 10_000_000},
        {"scenario": {"l": 50.0, "m": 10.0}},
    ],
)
async def test_simulate_rejects_bad_config(client, payload):
    response = await client.post("/simulate", json=payload)
    assert response.status_code == 400
