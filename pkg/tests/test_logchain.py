import hashlib
import json

import pytest

from phantomrla.logchain import (
    GENESIS_DIGEST,
    LogChain,
    LogCorrupt,
    canonical_json,
    chain_digest,
)


class TestCanonicalJson:
    def test_sorted_compact_ascii(self):
        s = canonical_json({"b": 1, "a": [2, 3], "ü": "x"})
        assert s == '{"a":[2,3],"b":1,"\\u00fc":"x"}'

    def test_stable(self):
        a = canonical_json({"x": 1, "y": {"b": 2, "a": 3}})
        b = canonical_json(json.loads(a))
        assert a == b


class TestChain:
    def test_genesis(self):
        chain = LogChain()
        assert chain.last_digest == GENESIS_DIGEST
        assert chain.records == []

    def test_digest_construction(self):
        chain = LogChain()
        rec = chain.append({"type": "x", "n": 1})
        body = {"type": "x", "n": 1}
        expect = hashlib.sha256(
            GENESIS_DIGEST.encode("ascii") + b"\n" + canonical_json(body).encode()
        ).hexdigest()
        assert rec["digest"] == expect
        assert chain.last_digest == expect
        assert chain_digest(GENESIS_DIGEST, body) == expect

    def test_append_links(self):
        chain = LogChain()
        r1 = chain.append({"type": "a"})
        r2 = chain.append({"type": "b"})
        assert r2["digest"] == chain_digest(r1["digest"], {"type": "b"})

    def test_reserved_key_rejected(self):
        chain = LogChain()
        with pytest.raises(LogCorrupt):
            chain.append({"type": "a", "digest": "claimed"})


class TestRoundTrip:
    def build(self):
        chain = LogChain()
        chain.append({"type": "a", "n": 1})
        chain.append({"type": "b", "payload": {"deep": [1, 2]}})
        chain.append({"type": "c"})
        return chain

    def test_lines_round_trip(self):
        chain = self.build()
        again = LogChain.from_lines(chain.to_lines())
        assert again.records == chain.records
        assert again.last_digest == chain.last_digest

    def test_blank_lines_ignored(self):
        lines = self.build().to_lines()
        lines.insert(1, "")
        assert len(LogChain.from_lines(lines).records) == 3

    def test_tampered_record_detected(self):
        lines = self.build().to_lines()
        lines[1] = lines[1].replace('"payload"', '"payioad"')
        with pytest.raises(LogCorrupt, match="line"):
            LogChain.from_lines(lines)

    def test_tampered_value_detected(self):
        lines = self.build().to_lines()
        lines[0] = lines[0].replace('"n":1', '"n":2')
        with pytest.raises(LogCorrupt):
            LogChain.from_lines(lines)

    def test_dropped_record_detected(self):
        lines = self.build().to_lines()
        del lines[1]
        with pytest.raises(LogCorrupt):
            LogChain.from_lines(lines)

    def test_reordered_records_detected(self):
        lines = self.build().to_lines()
        lines[1], lines[2] = lines[2], lines[1]
        with pytest.raises(LogCorrupt):
            LogChain.from_lines(lines)

    def test_missing_digest_detected(self):
        lines = self.build().to_lines()
        obj = json.loads(lines[0])
        del obj["digest"]
        lines[0] = canonical_json(obj)
        with pytest.raises(LogCorrupt):
            LogChain.from_lines(lines)

    def test_not_json_detected(self):
        with pytest.raises(LogCorrupt):
            LogChain.from_lines(["{broken"])
