import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from formloop.linker import LinkConfig, LinkResult, link
from formloop.model import BBox, Entity, GenericLabel, Page
from formloop.oracle import link_oracle
from formloop.synth import random_entities

PAGE = Page(1000, 800)


def ent(eid, label, x, y, w=60, h=20):
    return Entity(eid, label, (eid,), f"e{eid}", BBox(x, y, x + w, y + h))


def key(eid, x, y, **kw):
    return ent(eid, GenericLabel.KEY, x, y, **kw)


def val(eid, x, y, **kw):
    return ent(eid, GenericLabel.VALUE, x, y, **kw)


class TestLinkBasics:
    def test_simple_pair(self):
        result = link([key(0, 0, 0), val(1, 100, 0)], PAGE)
        assert result.pairs == ((0, 1),)
        assert result.dropped_values == ()
        assert result.unlinked_keys == ()

    def test_value_before_any_key_is_dropped(self):
        result = link([val(0, 0, 0), key(1, 200, 0)], PAGE)
        assert result.pairs == ()
        assert result.dropped_values == (0,)
        assert result.unlinked_keys == (1,)

    def test_key_claimed_once(self):
        # Two values on the key's line: the nearer claims it, the other
        # falls through to nothing and is dropped.
        result = link([key(0, 0, 0), val(1, 100, 0), val(2, 250, 0)], PAGE)
        assert result.pairs == ((0, 1),)
        assert result.dropped_values == (2,)

    def test_second_value_takes_second_key(self):
        result = link(
            [key(0, 0, 0), key(1, 400, 0), val(2, 460, 0), val(3, 90, 0)], PAGE
        )
        # Reading order: 0, 3, 1, 2. Value 3 takes key 0; value 2 takes key 1.
        assert set(result.pairs) == {(0, 3), (1, 2)}

    def test_nearest_wins_across_lines(self):
        far_key = key(0, 0, 0)
        near_key = key(1, 0, 100)
        value = val(2, 100, 100)
        result = link([far_key, near_key, value], PAGE)
        assert result.pairs == ((1, 2),)
        assert result.unlinked_keys == (0,)

    def test_distance_tie_keeps_earlier_key(self):
        # Keys equidistant left and right... but only the preceding one is
        # eligible; make both precede by placing them on an earlier line.
        a = key(0, 100, 0)
        b = key(1, 300, 0)
        v = val(2, 200, 100)  # equidistant from both key centers
        result = link([a, b, v], PAGE)
        assert result.pairs == ((0, 2),)

    def test_key_after_value_ineligible(self):
        result = link([val(0, 0, 0), key(1, 200, 0)], PAGE)
        assert result.pairs == ()

    def test_headers_and_other_ignored(self):
        h = ent(9, GenericLabel.HEADER, 90, 0)
        o = ent(8, GenericLabel.OTHER, 95, 0)
        result = link([key(0, 0, 0), h, o, val(1, 200, 0)], PAGE)
        assert result.pairs == ((0, 1),)

    def test_empty_input(self):
        result = link([], PAGE)
        assert result == LinkResult((), (), ())


class TestMaxDistance:
    def test_cap_drops_distant_value(self):
        # Page diagonal is sqrt(1000^2+800^2) ~ 1280.6; ratio 0.1 caps at ~128.
        cfg = LinkConfig(max_link_distance_ratio=0.1)
        result = link([key(0, 0, 0), val(1, 500, 0)], PAGE, cfg)
        assert result.dropped_values == (1,)
        assert result.unlinked_keys == (0,)

    def test_unbounded_links_anything(self):
        cfg = LinkConfig(max_link_distance_ratio=None)
        result = link([key(0, 0, 0), val(1, 900, 760)], PAGE, cfg)
        assert result.pairs == ((0, 1),)

    def test_cap_falls_through_to_farther_eligible_key(self):
        # Nearest key is out of range, but "out of range" removes it from
        # candidacy entirely rather than dropping the value.
        cfg = LinkConfig(vertical_weight=1.0, max_link_distance_ratio=None)
        near = key(0, 0, 100)
        far = key(1, 0, 0)
        v = val(2, 120, 100)
        assert link([near, far, v], PAGE, cfg).pairs == ((0, 2),)

    def test_vertical_weight_changes_choice(self):
        # Same-line key at dx=330; previous-line key at dx=0, dy=44.
        same_line = key(0, 60, 100)
        prev_line = key(1, 390, 56)
        v = val(2, 400, 100, w=40)
        # Weight 1: prev-line key center distance is 44 < 330.
        assert link([prev_line, same_line, v], PAGE).pairs == ((1, 2),)
        # Weight 8: 44*8 = 352 > 330, the same-line key wins.
        cfg = LinkConfig(vertical_weight=8.0)
        assert link([prev_line, same_line, v], PAGE, cfg).pairs == ((0, 2),)


class TestConfigValidation:
    @pytest.mark.parametrize("weight", [0, -1.0])
    def test_bad_weight(self, weight):
        with pytest.raises(ValueError):
            LinkConfig(vertical_weight=weight)

    @pytest.mark.parametrize("ratio", [0.0, -0.5, 1.5])
    def test_bad_ratio(self, ratio):
        with pytest.raises(ValueError):
            LinkConfig(max_link_distance_ratio=ratio)

    def test_max_distance(self):
        assert LinkConfig(max_link_distance_ratio=0.5).max_distance(Page(800, 600)) == 500.0
        assert LinkConfig(max_link_distance_ratio=None).max_distance(PAGE) is None


class TestResultValidation:
    def test_duplicate_key_rejected(self):
        with pytest.raises(ValueError):
            LinkResult(pairs=((0, 1), (0, 2)), dropped_values=(), unlinked_keys=())

    def test_paired_and_dropped_value_rejected(self):
        with pytest.raises(ValueError):
            LinkResult(pairs=((0, 1),), dropped_values=(1,), unlinked_keys=())


class TestInvariants:
    """Structural laws that must hold on any input."""

    def check(self, entities, page, cfg):
        result = link(entities, page, cfg)
        keys = {e.entity_id for e in entities if e.label is GenericLabel.KEY}
        values = {e.entity_id for e in entities if e.label is GenericLabel.VALUE}
        paired_keys = [k for k, _ in result.pairs]
        paired_values = [v for _, v in result.pairs]
        # Each key at most once, each value exactly once (paired or dropped).
        assert len(set(paired_keys)) == len(paired_keys)
        assert set(paired_keys) | set(result.unlinked_keys) == keys
        assert not set(paired_keys) & set(result.unlinked_keys)
        assert sorted(paired_values + list(result.dropped_values)) == sorted(values)
        # Distance cap respected.
        limit = cfg.max_distance(page)
        if limit is not None:
            by_id = {e.entity_id: e for e in entities}
            from formloop.model import center_distance

            for k, v in result.pairs:
                d = center_distance(by_id[k].box, by_id[v].box, cfg.vertical_weight)
                assert d <= limit + 1e-9
        return result

    def test_invariants_on_random_layouts(self):
        rng = random.Random(20260821)
        page = Page(816, 1056)
        for trial in range(150):
            entities = random_entities(rng, page)
            cfg = LinkConfig(
                vertical_weight=rng.choice([0.5, 1.0, 2.0]),
                max_link_distance_ratio=rng.choice([0.5, 1.0, None]),
            )
            self.check(entities, page, cfg)

    def test_permutation_invariance(self):
        rng = random.Random(99)
        page = Page(816, 1056)
        for _ in range(30):
            entities = random_entities(rng, page)
            shuffled = list(entities)
            rng.shuffle(shuffled)
            assert link(entities, page) == link(shuffled, page)


class TestAgainstOracle:
    """The production linker must agree with the independent reference."""

    def test_agrees_on_random_layouts(self):
        rng = random.Random(4242)
        page = Page(816, 1056)
        for trial in range(300):
            entities = random_entities(rng, page)
            cfg = LinkConfig(
                vertical_weight=rng.choice([0.5, 1.0, 2.0]),
                max_link_distance_ratio=rng.choice([0.5, 1.0, None]),
            )
            expect = link_oracle(entities, page, cfg)
            got = link(entities, page, cfg)
            assert got.pairs == expect.pairs, f"trial {trial}"
            assert got.dropped_values == expect.dropped_values
            assert set(got.unlinked_keys) == set(expect.unlinked_keys)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_agrees_on_hypothesis_seeds(self, seed):
        rng = random.Random(seed)
        page = Page(1000, 700)
        entities = random_entities(rng, page)
        assert link(entities, page).pairs == link_oracle(entities, page).pairs
