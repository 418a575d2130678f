"""Archive parsing, the genre/activity filter, stats, and splitting."""

import numpy as np
import pytest

from faircf.ingest import filter_dataset, genre_stats, parse, split
from conftest import write_ml_corpus


def filtered(mini_ml_dir, min_ratings=2):
    return filter_dataset(parse(mini_ml_dir), min_ratings=min_ratings)


def test_parse_reads_whole_archive(mini_ml_dir):
    raw = parse(mini_ml_dir)
    assert len(raw.users) == 6 and len(raw.movies) == 5
    assert raw.num_ratings == 11
    assert raw.users[1] == ("F", 1, 10, "48067")
    assert raw.movies[3] == ("Space Probe (1997)", ("Sci-Fi", "Action"))
    assert raw.rating_values.min() >= 1 and raw.rating_values.max() <= 5


def test_parse_rejects_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        parse(tmp_path)


@pytest.mark.parametrize("column,content,message", [
    ("users", "1::F::1::10\n", "5 '::'-separated fields"),
    ("users", "1::X::1::10::48067\n", "gender"),
    ("ratings", "1::1::6::978300760\n", "outside 1..5"),
    ("ratings", "1::99::5::978300760\n", "unknown movie"),
    ("ratings", "9::1::5::978300760\n", "unknown user"),
    ("ratings", "", "no ratings"),
])
def test_parse_reports_bad_lines(tmp_path, column, content, message):
    kwargs = {column: content} if column == "users" else {"ratings": content}
    corpus = write_ml_corpus(tmp_path / "corrupt", **kwargs)
    with pytest.raises(ValueError, match=message):
        parse(corpus)


def test_filter_keeps_expected_users_and_movies(mini_ml_dir):
    data = filtered(mini_ml_dir)
    # Documentary-only movie 4 drops; users 5 and 6 fall under the threshold
    assert data.user_ids.tolist() == [1, 2, 3, 4]
    assert data.movie_ids.tolist() == [1, 2, 3, 5]
    assert data.ratings.num_users == 4 and data.ratings.num_items == 4
    assert len(data.ratings) == 9
    assert data.groups.disadvantaged.tolist() == [True, False, True, False]
    assert set(data.movie_genres[2]) == {"Sci-Fi", "Action"}


def test_filter_reindexes_ratings(mini_ml_dir):
    data = filtered(mini_ml_dir)
    entries = set(data.ratings.entries)
    assert (0, 0, 5.0) in entries        # archive user 1 on movie 1
    assert (3, 3, 3.0) in entries        # archive user 4 on movie 5
    assert (2, 3, 4.0) in entries        # archive user 3 on movie 5


def test_filter_threshold_is_counted_on_kept_movies(mini_ml_dir):
    # user 5's only rating is on a selected-genre movie but one is too few,
    # user 6 rates only the dropped Documentary
    data = filtered(mini_ml_dir, min_ratings=3)
    assert data.user_ids.tolist() == [1]
    assert data.movie_ids.tolist() == [1, 2, 3]


def test_filter_is_case_insensitive(mini_ml_dir):
    data = filter_dataset(parse(mini_ml_dir), genres=("ACTION", "sci-fi"),
                          min_ratings=1)
    assert data.genres == ("Action", "Sci-Fi")
    assert data.movie_ids.tolist() == [1, 3]


def test_genre_stats_hand_values(mini_ml_dir):
    stats = genre_stats(filtered(mini_ml_dir))
    assert [r.genre for r in stats.rows] == ["Romance", "Action", "Sci-Fi",
                                             "Musical", "Crime"]
    action = stats.get("Action")
    assert action.movie_count == 2
    assert action.ratings_per_female == pytest.approx(1.0)
    assert action.ratings_per_male == pytest.approx(1.5)
    assert action.avg_rating_female == pytest.approx(4.5)
    assert action.avg_rating_male == pytest.approx(11.0 / 3.0)
    romance = stats.get("Romance")
    assert romance.movie_count == 2
    assert romance.ratings_per_female == pytest.approx(1.5)
    assert romance.ratings_per_male == pytest.approx(0.5)
    assert romance.avg_rating_female == pytest.approx(4.0)
    assert romance.avg_rating_male == pytest.approx(3.0)
    crime = stats.get("Crime")
    assert crime.movie_count == 0
    assert crime.ratings_per_female == 0.0
    assert np.isnan(crime.avg_rating_female)


def test_genre_stats_render_and_csv(mini_ml_dir):
    stats = genre_stats(filtered(mini_ml_dir))
    table = stats.render()
    assert "Action" in table and "4.50" in table
    csv = stats.to_csv()
    assert csv.splitlines()[0].startswith("genre,movie_count")
    assert len(csv.splitlines()) == 6


def test_split_partitions_the_entries(mini_ml_dir):
    data = filtered(mini_ml_dir)
    train, test = split(data, test_fraction=0.2, seed=0)
    assert len(test) == 2 and len(train) == 7     # round(9 * 0.2) = 2
    keys = lambda rs: set(zip(rs.users.tolist(), rs.items.tolist()))
    assert not keys(train) & keys(test)
    assert keys(train) | keys(test) == keys(data.ratings)
    again_train, again_test = split(data, test_fraction=0.2, seed=0)
    assert np.array_equal(again_test.users, test.users)
    other_train, other_test = split(data, test_fraction=0.2, seed=1)
    assert keys(other_test) != keys(test)


def test_split_rejects_empty_sides(mini_ml_dir):
    data = filtered(mini_ml_dir)
    with pytest.raises(ValueError):
        split(data, test_fraction=0.01, seed=0)   # rounds to zero test entries
    with pytest.raises(ValueError):
        split(data, test_fraction=1.5, seed=0)


def test_filter_rejects_empty_results(mini_ml_dir):
    raw = parse(mini_ml_dir)
    with pytest.raises(ValueError):
        filter_dataset(raw, genres=())
    with pytest.raises(ValueError):
        filter_dataset(raw, min_ratings=50)       # nobody is that active here
