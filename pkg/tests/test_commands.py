"""
analyze, simulate and validate on model documents.
"""
import pytest

from app import commands
from app.catalogue import sir_demography_parameters
from app.errors import ModelDefinitionError, UnsupportedCombinationError
from app.models import ModelDocument

ROSS = {"a": 0.3, "p_vh": 0.5, "p_hv": 0.5, "m": 2.0, "gamma": 0.05, "mu": 0.1}


def document(**fields):
    return ModelDocument.model_validate(fields)


def sir_document(lam, population=1000, **extra):
    return document(model="SIR", params={"lambda": lam, "gamma": 1.0}, population=population, **extra)


def test_example_r0_and_escape(seir_document):
    report = commands.analyze(ModelDocument.model_validate(seir_document), ["r0", "escape"])
    assert report["r0"] == pytest.approx(1.8)
    assert report["escape"] == pytest.approx(0.9823, abs=1e-4)
    assert set(report["formulas"]) == {"r0", "escape"}


def test_r0_of_each_family(measles_document):
    assert commands.document_r0(ModelDocument.model_validate(measles_document)) == pytest.approx(15.0)
    assert commands.document_r0(document(model="Ross-malaria", params=ROSS, population=100)) == pytest.approx(3.0)
    seirs = document(model="SEIRS-demography", population=100,
                     params={"lambda": 3.0, "nu": 1.0, "gamma": 1.0, "rho": 0.5, "mu": 0.5})
    assert commands.document_r0(seirs) == pytest.approx(3.0 / (1.5 * 1.5))


def test_final_size_and_asymptotics():
    report = commands.analyze(sir_document(3.0), ["final-size"])
    assert report["final_size"]["z_star"] == pytest.approx(0.940, abs=5e-4)
    report = commands.analyze(sir_document(1.5), ["asymptotics", "extinction"])
    assert report["asymptotics"]["clt_mean"] == pytest.approx(582.8, abs=0.1)
    assert report["extinction"] == pytest.approx(2 / 3, abs=1e-9)


def test_growth_and_duration():
    report = commands.analyze(sir_document(1.5), ["malthus", "duration"])
    assert report["malthus"]["r"] == pytest.approx(0.5)
    assert report["duration"]["slope_in_log_n"] == pytest.approx(4.672, abs=1e-3)
    seir = document(model="SEIR", params={"lambda": 1.5, "nu": 1.0, "gamma": 1.0}, population=1000)
    assert commands.analyze(seir, ["malthus"])["malthus"]["r"] == pytest.approx(0.2247, abs=1e-4)


def test_vaccination_report():
    doc = sir_document(2.0, vaccination={"coverage": 1 / 3})
    report = commands.analyze(doc, ["vaccination", "takeoff"])
    assert report["vaccination"]["critical_coverage"] == pytest.approx(0.5)
    assert report["vaccination"]["r_v"] == pytest.approx(4 / 3)
    assert report["vaccination"]["community"] == pytest.approx(0.3029, abs=5e-4)
    assert report["takeoff"] == pytest.approx(0.25)


def test_exact_laws_agree_for_reed_frost(reed_frost_document):
    doc = ModelDocument.model_validate(reed_frost_document)
    report = commands.analyze(doc, ["exact-pmf", "chain-binomial"])
    assert report["exact_pmf"]["n"] == 10
    assert report["exact_pmf"]["probs"] == pytest.approx(report["chain_binomial"]["probs"], abs=1e-10)


def test_critical_community_size(measles_document):
    report = commands.analyze(ModelDocument.model_validate(measles_document), ["ncrit", "endemic"])
    assert report["ncrit"] == pytest.approx(9.686e6, rel=1e-3)
    assert report["endemic"]["s_hat"] == pytest.approx(1 / 15)


def test_endemic_levels(sis_document):
    assert commands.analyze(ModelDocument.model_validate(sis_document), ["endemic"])["endemic"]["i_hat"] == 0.5
    ross = commands.analyze(document(model="Ross-malaria", params=ROSS, population=100), ["endemic"])
    assert ross["endemic"]["h_hat"] == pytest.approx(8 / 10.5)


def test_covariance_report():
    doc = document(model="SIR-demography", params=sir_demography_parameters(2.0, 0.1), population=1000)
    report = commands.analyze(doc, ["covariance"])["covariance"]
    assert report["covariance"] == pytest.approx(report["closed_form"], abs=1e-9)
    assert report["point"] == pytest.approx([0.5, 0.05])
    assert report["compartments"] == ["s", "i"]
    assert report["residual"] < 1e-10
    assert set(report) == {"compartments", "covariance", "residual", "point", "closed_form"}


def test_quasipotential_report(sis_document):
    report = commands.analyze(ModelDocument.model_validate(sis_document), ["quasipotential"])["quasipotential"]
    assert report["V_bar"] == pytest.approx(0.1931, abs=1e-4)
    assert report["quadrature"] == pytest.approx(report["V_bar"], abs=1e-10)
    assert report["central_scale"]["30"] == pytest.approx(330, rel=0.01)
    assert report["extinction_time"]["lower"] < report["extinction_time"]["upper"]


def test_unsupported_requests(seir_document):
    doc = ModelDocument.model_validate(seir_document)
    for key in ("ncrit", "quasipotential", "endemic", "covariance"):
        with pytest.raises(UnsupportedCombinationError):
            commands.analyze(doc, [key])
    with pytest.raises(UnsupportedCombinationError):
        commands.analyze(doc, ["bogus"])
    with pytest.raises(ModelDefinitionError):
        commands.analyze(document(model="Ross-malaria", params=ROSS, population=10), ["escape"])


def test_replica_job_checks(reed_frost_document, sis_document, seir_document):
    with pytest.raises(UnsupportedCombinationError):
        commands.replica_job(ModelDocument.model_validate(reed_frost_document), "markov", 10, 0)
    with pytest.raises(UnsupportedCombinationError):
        commands.replica_job(ModelDocument.model_validate(sis_document), "sellke", 10, 0)
    with pytest.raises(UnsupportedCombinationError):
        commands.replica_job(ModelDocument.model_validate(seir_document), "agent", 10, 0, horizon=5.0)
    job = commands.replica_job(ModelDocument.model_validate(sis_document), "markov", 10, 0, horizon=5.0)
    assert job.initial == (15,) and job.horizon == 5.0


def test_markov_jobs_reject_a_conflicting_exponential_rate():
    conflicting = sir_document(1.5, infectious={"kind": "exponential", "rate": 2.0})
    with pytest.raises(ModelDefinitionError):
        commands.replica_job(conflicting, "markov", 10, 0)
    latent = document(model="SEIR", params={"lambda": 1.5, "nu": 2.0, "gamma": 1.0}, population=100,
                      latent={"kind": "exponential", "rate": 3.0})
    with pytest.raises(ModelDefinitionError):
        commands.replica_job(latent, "markov", 10, 0)
    agreeing = sir_document(1.5, infectious={"kind": "exponential", "rate": 1.0})
    assert commands.replica_job(agreeing, "markov", 10, 0).model_params == {"lambda": 1.5, "gamma": 1.0}


def test_simulate_summary(reed_frost_document):
    doc = ModelDocument.model_validate(reed_frost_document)
    job, outcomes, summary = commands.simulate(doc, "sellke", 50, 3, parallelism=1)
    assert len(outcomes) == 50 and job.method == "sellke"
    assert summary.replicas == 50 and summary.master_seed == 3
    assert 0 <= summary.mean_final_size <= 10


def test_takeoff_fraction_of_simulated_outbreaks():
    _, _, summary = commands.simulate(sir_document(1.5), "sellke", 3000, 21, parallelism=1)
    assert summary.takeoff_fraction == pytest.approx(1 / 3, abs=0.03)


def test_validate_dispatch(reed_frost_document, sis_document):
    doc = ModelDocument.model_validate(reed_frost_document)
    assert commands.validate(doc, "mc-vs-exact", 2000, 1, parallelism=1).passed
    assert commands.validate(doc, "wald", 500, 1, theta=0.5, parallelism=1).passed
    with pytest.raises(UnsupportedCombinationError):
        commands.validate(ModelDocument.model_validate(sis_document), "lln", 10, 1)
    with pytest.raises(UnsupportedCombinationError):
        commands.validate(doc, "ldp-slope", 10, 1)
    with pytest.raises(UnsupportedCombinationError):
        commands.validate(doc, "ou-variance", 10, 1)
    with pytest.raises(UnsupportedCombinationError):
        commands.validate(doc, "wald", 10, 1, sampler="markov")
    assert commands.validate(doc, "mc-vs-exact", 1000, 2, parallelism=1, sampler="agent").passed
