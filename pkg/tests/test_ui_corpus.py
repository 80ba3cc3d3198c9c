"""Every data URL the browser UI can emit must parse under the server
grammar: the UI's URL-builder test freezes its outputs into a shared
corpus, and this side re-parses each entry."""
import json
from pathlib import Path

import pytest

from ercatalog import urls

CORPUS = Path(__file__).parent.parent / "frontend" / "corpus" / "ui-urls.json"


@pytest.mark.skipif(not CORPUS.exists(), reason="frontend corpus not generated")
def test_every_ui_url_parses_under_the_server_grammar():
    corpus = json.loads(CORPUS.read_text(encoding="utf-8"))
    assert len(corpus) >= 10
    for entry in corpus:
        path, _, query = entry.partition("?")
        ast = urls.parse(path, query or None)
        # and the UI emits canonical text: re-rendering is the identity
        assert urls.render(ast) == entry
