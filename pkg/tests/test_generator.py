import pytest
from fastapi import FastAPI
from fastapi.responses import JSONResponse, PlainTextResponse

from helpers import ServerThread

from kgalign.generator import (
    GeneratedPath,
    GeneratorError,
    GeneratorParseError,
    GeneratorRequest,
    RemoteGenerator,
    StubGenerator,
    parse_path_text,
    render_generated,
    select_endpoints_gold,
    select_endpoints_linked,
)
from kgalign.kgstore import TextTriple
from kgalign.linker import ANSWER_SIDE, QUERY_SIDE, link_enhanced


class TestEndpointSelection:
    def test_linked_first_of_query_last_of_answer(self, fixture_graph):
        cs_q = link_enhanced(
            "The bodybuilder lifted weights The gym closed", fixture_graph, side=QUERY_SIDE
        )
        cs_a = link_enhanced(
            "The bodybuilder lifted weights Her muscles became fatigued",
            fixture_graph,
            side=ANSWER_SIDE,
        )
        assert cs_q.labels()[0] == "bodybuilder"
        assert cs_a.labels()[-1] == "muscle"
        request = select_endpoints_linked(cs_q, cs_a)
        assert request == GeneratorRequest("bodybuilder", "muscle")

    def test_either_empty_side_gives_nothing(self, fixture_graph):
        empty = link_enhanced("zzz qqq", fixture_graph)
        full = link_enhanced("coffee", fixture_graph)
        assert select_endpoints_linked(empty, full) is None
        assert select_endpoints_linked(full, empty) is None

    def test_singleton_sides(self, fixture_graph):
        a = link_enhanced("coffee", fixture_graph, side=QUERY_SIDE)
        b = link_enhanced("cafe", fixture_graph, side=ANSWER_SIDE)
        assert select_endpoints_linked(a, b) == GeneratorRequest("coffee", "cafe")

    def test_gold_first_head_last_tail(self):
        gold = [
            TextTriple("Man", "feels", "ashamed"),
            TextTriple("makeup", "used for", "hide scar"),
        ]
        assert select_endpoints_gold(gold) == GeneratorRequest("man", "hide scar")

    def test_gold_single_triple(self):
        assert select_endpoints_gold([("a", "r", "b")]) == GeneratorRequest("a", "b")

    def test_gold_empty(self):
        assert select_endpoints_gold([]) is None

    def test_gold_blank_endpoint(self):
        assert select_endpoints_gold([("", "r", "b")]) is None


class TestParsePathText:
    def test_paper_example_two_triples(self):
        parsed = parse_path_text("masking tape used for hide scar, masking tape is a makeup")
        assert parsed == (
            TextTriple("masking tape", "used for", "hide scar"),
            TextTriple("masking tape", "is a", "makeup"),
        )

    def test_longest_relation_wins(self):
        (triple,) = parse_path_text("robot not capable of love")
        assert triple == TextTriple("robot", "not capable of", "love")

    def test_missing_tail_yields_empty_field(self):
        (triple,) = parse_path_text("masking tape used for")
        assert triple == TextTriple("masking tape", "used for", "")

    def test_unrecognizable_segment_becomes_degenerate_record(self):
        (triple,) = parse_path_text("complete gibberish words")
        assert triple == TextTriple("complete gibberish words", "", "")

    def test_empty_text(self):
        assert parse_path_text("") == ()
        assert parse_path_text("   ") == ()

    def test_render_round_trip(self):
        for text in (
            "masking tape used for hide scar, masking tape is a makeup",
            "coffee related to cafe",
            "a is a b, b part of c",
        ):
            parsed = parse_path_text(text)
            assert " ".join(render_generated(parsed).split()) == " ".join(text.split())


class TestStubGenerator:
    def test_template(self):
        path = StubGenerator().generate(GeneratorRequest("masking tape", "makeup"))
        assert path.text == "masking tape related to makeup"
        assert path.parsed == (TextTriple("masking tape", "related to", "makeup"),)

    def test_round_trip(self):
        path = StubGenerator().generate(GeneratorRequest("coffee", "catch up"))
        assert parse_path_text(path.text) == path.parsed


def _mock_generator_app():
    app = FastAPI()

    @app.post("/generate")
    def handle(body: dict):
        start, end = body["start"], body["end"]
        if start == "__fail__":
            return JSONResponse({"error": "model offline"}, status_code=503)
        if start == "__malformed__":
            return PlainTextResponse("not json at all")
        if start == "__wrong_shape__":
            return {"paths": ["missing singular key"]}
        return {"path": f"{start} used for hide scar, {start} is a {end}"}

    return app


@pytest.fixture(scope="module")
def generator_url():
    with ServerThread(_mock_generator_app()) as server:
        yield server.base_url


class TestRemoteGenerator:
    def test_remote_path_parsed_into_triples(self, generator_url):
        client = RemoteGenerator(generator_url)
        path = client.generate(GeneratorRequest("masking tape", "makeup"))
        assert path.text == "masking tape used for hide scar, masking tape is a makeup"
        assert len(path.parsed) == 2
        assert path.parsed[0].relation == "used for"

    def test_service_error_carries_request_context(self, generator_url):
        client = RemoteGenerator(generator_url)
        with pytest.raises(GeneratorError) as err:
            client.generate(GeneratorRequest("__fail__", "makeup"))
        assert err.value.request.start == "__fail__"
        assert "503" in str(err.value)

    def test_unreachable_service(self):
        client = RemoteGenerator("http://127.0.0.1:9", timeout=0.2)
        with pytest.raises(GeneratorError, match="unreachable"):
            client.generate(GeneratorRequest("a", "b"))

    def test_malformed_response_preserves_raw(self, generator_url):
        client = RemoteGenerator(generator_url)
        with pytest.raises(GeneratorParseError) as err:
            client.generate(GeneratorRequest("__malformed__", "x"))
        assert err.value.raw == "not json at all"

    def test_missing_path_key(self, generator_url):
        client = RemoteGenerator(generator_url)
        with pytest.raises(GeneratorParseError):
            client.generate(GeneratorRequest("__wrong_shape__", "x"))
