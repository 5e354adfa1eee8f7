"""Name canonicalization tests: edit distance, clustering, attorney parsing."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ahpi.errors import InvalidArgumentError
from ahpi.names import (
    ClusterAssignment,
    ParseConfig,
    PartyRole,
    agglomerate,
    apply_replacements,
    cluster_distance,
    levenshtein,
    parse_attorney_substring,
)

short_text = st.text(alphabet="abcd -&", min_size=0, max_size=8)


class TestLevenshtein:
    def test_reference_values(self):
        assert levenshtein("plaintiff", "plaintif") == 1
        assert levenshtein("plaintiff", "defendant") == 8

    def test_empty_base_case(self):
        for s in ("", "a", "word", "&"):
            assert levenshtein("", s) == len(s)
            assert levenshtein(s, "") == len(s)

    def test_identity(self):
        assert levenshtein("same", "same") == 0

    @given(short_text, short_text)
    @settings(max_examples=200)
    def test_symmetry(self, a, b):
        assert levenshtein(a, b) == levenshtein(b, a)

    @given(short_text, short_text, short_text)
    @settings(max_examples=300)
    def test_triangle_inequality(self, a, b, c):
        assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)

    @given(short_text, short_text)
    @settings(max_examples=200)
    def test_length_gap_lower_bound(self, a, b):
        assert levenshtein(a, b) >= abs(len(a) - len(b))


class TestClusterDistance:
    def test_singletons(self):
        assert cluster_distance(["abc"], ["abd"]) == pytest.approx(levenshtein("abc", "abd"))

    def test_average(self):
        assert cluster_distance(["ab"], ["ab", "abc"]) == pytest.approx(0.5)

    def test_identical_singletons(self):
        assert cluster_distance(["x"], ["x"]) == 0.0

    def test_empty_rejected(self):
        with pytest.raises(InvalidArgumentError):
            cluster_distance([], ["a"])


def brute_force_agglomerate(freq: dict[str, int], threshold: float) -> dict[str, str]:
    """Reference clustering: rescan all cluster pairs from scratch each round."""
    clusters = [[s] for s in sorted(freq)]
    while True:
        best = None
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                d = cluster_distance(clusters[i], clusters[j])
                if d >= threshold:
                    continue
                label = tuple(sorted((min(clusters[i]), min(clusters[j]))))
                key = (d, label)
                if best is None or key < best[0]:
                    best = (key, i, j)
        if best is None:
            break
        _, i, j = best
        merged = sorted(clusters[i] + clusters[j])
        clusters = [c for k, c in enumerate(clusters) if k not in (i, j)] + [merged]
    canonical = {}
    for members in clusters:
        representative = min(members, key=lambda s: (-freq[s], s))
        for s in members:
            canonical[s] = representative
    return canonical


class TestAgglomerate:
    def test_putman_variants(self):
        raw_counts = {
            "putman & putman": 100,
            "put-man and put-man": 5,
            "putman <& putman": 1,
        }
        fixed: dict[str, int] = {}
        for raw, n in raw_counts.items():
            key = apply_replacements(raw)
            fixed[key] = fixed.get(key, 0) + n
        assignment = agglomerate(fixed, 2.7)
        for raw in raw_counts:
            assert assignment.apply(apply_replacements(raw)) == "putman & putman"

    def test_below_threshold_identity(self):
        words = {"alpha": 3, "bravo": 2, "charlie": 1}
        assignment = agglomerate(words, 0.5)
        assert assignment.canonical == {w: w for w in words}

    def test_matches_brute_force_on_random_instances(self, rng):
        letters = np.array(list("abcde &-"))
        for trial in range(50):
            n_strings = 10
            freq = {}
            for _ in range(n_strings):
                length = int(rng.integers(1, 8))
                s = "".join(rng.choice(letters, size=length))
                freq[s] = int(rng.integers(1, 6))
            threshold = float(rng.uniform(0.8, 3.5))
            assignment = agglomerate(freq, threshold)
            expected = brute_force_agglomerate(freq, threshold)
            assert assignment.canonical == expected, f"trial {trial} threshold {threshold}"

    def test_accepts_iterable_with_repeats(self):
        assignment = agglomerate(["aa", "aa", "ab"], 2.0)
        assert assignment.apply("ab") == "aa"

    def test_representative_most_frequent_tie_lexicographic(self):
        assignment = agglomerate({"ab": 2, "ac": 2}, 2.0)
        assert assignment.apply("ac") == "ab"

    def test_every_string_in_exactly_one_cluster(self, rng):
        freq = {f"w{i}{'x' * int(rng.integers(0, 4))}": 1 for i in range(12)}
        assignment = agglomerate(freq, 2.5)
        seen = [m for members, _ in assignment.clusters for m in members]
        assert sorted(seen) == sorted(freq)

    def test_threshold_monotone_coarsening(self, rng):
        freq = {"aaa": 1, "aab": 2, "abb": 1, "bbb": 3, "xyz": 1}
        previous = None
        for c in (0.5, 1.5, 2.5, 3.5):
            n_clusters = len(agglomerate(freq, c).clusters)
            if previous is not None:
                assert n_clusters <= previous
            previous = n_clusters

    def test_canonicalization_idempotent(self, rng):
        freq = {"aaa": 1, "aab": 2, "abb": 1, "bbb": 3}
        assignment = agglomerate(freq, 1.5)
        for s in freq:
            once = assignment.apply(s)
            assert assignment.apply(once) == once

    def test_invalid_threshold(self):
        with pytest.raises(InvalidArgumentError):
            agglomerate({"a": 1}, 0.0)


class TestParseAttorneySubstring:
    def test_ampersand_firm_with_role(self):
        parsed = parse_attorney_substring(
            "Michael H. Auen, of Foley & Lardner, Madison, Wis., for plaintiff."
        )
        assert parsed is not None
        assert parsed.role is PartyRole.PLAINTIFF
        assert parsed.firms == ("foley & lardner",)

    def test_keyword_firm_with_backward_extension(self):
        parsed = parse_attorney_substring(
            "Richard G. Moon, Robert M. Hayes, Moon, Moss, McGill & Bachelder, P.A., "
            "Portland, ME, for Defendants."
        )
        assert parsed is not None
        assert parsed.role is PartyRole.DEFENDANT
        assert parsed.firms == ("moon, moss, mcgill & bachelder",)

    def test_keyword_only_segment(self):
        parsed = parse_attorney_substring(
            "David C. Rice, Patton Boggs, L.L.P., Madison, Wis., for defendants."
        )
        assert parsed is not None
        assert parsed.firms == ("patton boggs",)

    def test_no_firm_is_absent(self):
        assert parse_attorney_substring("John Doe, pro se.") is None

    def test_role_prefix_matching(self):
        parsed = parse_attorney_substring("Smith & Jones, for plaintiffs-appellants.")
        assert parsed is not None
        assert parsed.role is PartyRole.PLAINTIFF

    def test_unknown_role_is_other(self):
        parsed = parse_attorney_substring("Smith & Jones, for amicus curiae.")
        assert parsed is not None
        assert parsed.role is PartyRole.OTHER

    def test_missing_role_marker(self):
        parsed = parse_attorney_substring("Smith & Jones.")
        assert parsed is not None
        assert parsed.role is PartyRole.OTHER
        assert parsed.firms == ("smith & jones",)

    def test_full_point_expansion_applies(self):
        parsed = parse_attorney_substring("U.S. Dept. counsel, Smith & Jones, for plaintiff.")
        assert parsed is not None
        assert parsed.firms == ("smith & jones",)

    def test_ocr_replacement_in_firm(self):
        parsed = parse_attorney_substring("Putman <& Putman, for defendant.")
        assert parsed is not None
        assert parsed.firms == ("putman & putman",)

    def test_spelled_out_and_normalized(self):
        parsed = parse_attorney_substring("Putman and Putman LLP, for defendant.")
        assert parsed is not None
        assert parsed.firms == ("putman & putman",)

    def test_custom_keyword_table(self):
        config = ParseConfig(keywords=("gmbh",))
        parsed = parse_attorney_substring("Alpha Beta GmbH, for defendant.", config)
        assert parsed is not None
        assert parsed.firms == ("alpha beta",)


class TestApplyReplacements:
    def test_lowercase_and_table(self):
        assert apply_replacements("Putman <& PUTMAN") == "putman & putman"

    def test_whitespace_collapse(self):
        assert apply_replacements("  Foley   &  Lardner , ") == "foley & lardner"


class TestClusterAssignment:
    def test_unknown_string_passes_through(self):
        assignment = ClusterAssignment(canonical={"a": "a"}, clusters=((("a",), (1,)),))
        assert assignment.apply("zzz") == "zzz"
