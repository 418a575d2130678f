"""MovieLens-1M ingestion: parsing, genre/activity filtering, per-gender
genre statistics, and random train/test splitting.

The raw archive ships three ``::``-delimited latin-1 files (users.dat,
movies.dat, ratings.dat).  Preparation keeps only movies listing at least
one of the selected genres, then only users with at least ``min_ratings``
ratings on those movies, then reindexes both sides contiguously.  Women are
mapped to the disadvantaged group.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import GroupAssignment, RatingSet

DEFAULT_GENRES = ("Action", "Crime", "Musical", "Romance", "Sci-Fi")
DEFAULT_MIN_RATINGS = 50

# Presentation order used by the statistics table.
GENRE_TABLE_ORDER = ("Romance", "Action", "Sci-Fi", "Musical", "Crime")


@dataclass(eq=False)
class MovieLensRaw:
    """Parsed archive: users maps id -> (gender, age, occupation, zip),
    movies maps id -> (title, genre tuple), ratings are parallel arrays."""

    users: dict
    movies: dict
    rating_users: np.ndarray
    rating_movies: np.ndarray
    rating_values: np.ndarray
    rating_times: np.ndarray

    @property
    def num_ratings(self):
        return int(self.rating_values.shape[0])


@dataclass(eq=False)
class FilteredDataset:
    """Reindexed study subset.

    ``movie_genres[j]`` lists the selected genres movie j carries (a movie
    can count toward several).  ``user_ids``/``movie_ids`` map the new
    contiguous indices back to the archive ids.
    """

    ratings: RatingSet
    groups: GroupAssignment
    movie_genres: list
    user_ids: np.ndarray
    movie_ids: np.ndarray
    genres: tuple
    min_ratings: int


@dataclass
class GenreRow:
    genre: str
    movie_count: int
    ratings_per_female: float
    ratings_per_male: float
    avg_rating_female: float
    avg_rating_male: float


@dataclass(eq=False)
class GenreStats:
    """Per-genre movie counts, rating volume per user of each gender, and
    average given rating by gender."""

    rows: list

    def get(self, genre: str) -> GenreRow:
        for row in self.rows:
            if row.genre == genre:
                return row
        raise KeyError(genre)

    def to_csv(self) -> str:
        lines = ["genre,movie_count,ratings_per_female,ratings_per_male,"
                 "avg_rating_female,avg_rating_male"]
        for r in self.rows:
            lines.append(f"{r.genre},{r.movie_count},{r.ratings_per_female!r},"
                         f"{r.ratings_per_male!r},{r.avg_rating_female!r},{r.avg_rating_male!r}")
        return "\n".join(lines) + "\n"

    def render(self) -> str:
        headers = ("Genre", "Movies", "Ratings/female", "Ratings/male",
                   "Avg female", "Avg male")
        table = [headers]
        for r in self.rows:
            table.append((r.genre, str(r.movie_count),
                          f"{r.ratings_per_female:.2f}", f"{r.ratings_per_male:.2f}",
                          f"{r.avg_rating_female:.2f}", f"{r.avg_rating_male:.2f}"))
        widths = [max(len(row[c]) for row in table) for c in range(len(headers))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
                 for row in table]
        return "\n".join(lines) + "\n"


def _split_line(line: str, n_fields: int, path, lineno: int):
    fields = line.rstrip("\n").split("::")
    if len(fields) != n_fields:
        raise ValueError(f"{path}: line {lineno}: expected {n_fields} '::'-separated fields")
    return fields


def parse(ml_dir) -> MovieLensRaw:
    """Parse users.dat, movies.dat, ratings.dat from the archive directory."""
    ml_dir = Path(ml_dir)
    users_path = ml_dir / "users.dat"
    movies_path = ml_dir / "movies.dat"
    ratings_path = ml_dir / "ratings.dat"
    for p in (users_path, movies_path, ratings_path):
        if not p.exists():
            raise FileNotFoundError(f"missing MovieLens file: {p}")

    users = {}
    with users_path.open("r", encoding="latin-1") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            uid, gender, age, occupation, zipcode = _split_line(line, 5, users_path, lineno)
            if gender not in ("F", "M"):
                raise ValueError(f"{users_path}: line {lineno}: gender must be F or M")
            try:
                users[int(uid)] = (gender, int(age), int(occupation), zipcode)
            except ValueError:
                raise ValueError(f"{users_path}: line {lineno}: bad numeric field") from None

    movies = {}
    with movies_path.open("r", encoding="latin-1") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            mid, title, genres = _split_line(line, 3, movies_path, lineno)
            try:
                movies[int(mid)] = (title, tuple(genres.split("|")))
            except ValueError:
                raise ValueError(f"{movies_path}: line {lineno}: bad movie id") from None

    r_users, r_movies, r_values, r_times = [], [], [], []
    with ratings_path.open("r", encoding="latin-1") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            uid, mid, value, ts = _split_line(line, 4, ratings_path, lineno)
            try:
                uid, mid, value, ts = int(uid), int(mid), int(value), int(ts)
            except ValueError:
                raise ValueError(f"{ratings_path}: line {lineno}: bad numeric field") from None
            if not 1 <= value <= 5:
                raise ValueError(f"{ratings_path}: line {lineno}: rating outside 1..5")
            if uid not in users:
                raise ValueError(f"{ratings_path}: line {lineno}: unknown user {uid}")
            if mid not in movies:
                raise ValueError(f"{ratings_path}: line {lineno}: unknown movie {mid}")
            r_users.append(uid)
            r_movies.append(mid)
            r_values.append(value)
            r_times.append(ts)
    if not r_values:
        raise ValueError(f"{ratings_path}: no ratings found")

    return MovieLensRaw(users, movies,
                        np.array(r_users, dtype=np.int64),
                        np.array(r_movies, dtype=np.int64),
                        np.array(r_values, dtype=np.float64),
                        np.array(r_times, dtype=np.int64))


def filter_dataset(raw: MovieLensRaw, genres=DEFAULT_GENRES,
                   min_ratings: int = DEFAULT_MIN_RATINGS) -> FilteredDataset:
    """Keep selected-genre movies, then sufficiently active users, then the
    ratings between them; reindex both sides by ascending archive id."""
    if not genres:
        raise ValueError("at least one genre is required")
    if min_ratings < 1:
        raise ValueError("min_ratings must be >= 1")
    wanted = {g.casefold() for g in genres}

    # Movie pass: canonical spellings come from the archive itself.
    canonical = {}
    movie_selected = {}
    for mid, (_, movie_genres) in raw.movies.items():
        hits = tuple(g for g in movie_genres if g.casefold() in wanted)
        if hits:
            movie_selected[mid] = hits
            for g in hits:
                canonical.setdefault(g.casefold(), g)
    display_genres = tuple(canonical.get(g.casefold(), g) for g in genres)

    # User pass: activity counted on the kept movies only.
    kept_movie_mask = np.isin(raw.rating_movies, np.array(sorted(movie_selected), dtype=np.int64))
    counts = {}
    for uid in raw.rating_users[kept_movie_mask].tolist():
        counts[uid] = counts.get(uid, 0) + 1
    kept_users = sorted(uid for uid, c in counts.items() if c >= min_ratings)
    if not kept_users:
        raise ValueError("no user passes the activity threshold")

    # Rating pass plus contiguous reindexing.
    user_ids = np.array(kept_users, dtype=np.int64)
    user_index = {uid: i for i, uid in enumerate(kept_users)}
    kept_user_mask = np.isin(raw.rating_users, user_ids)
    final_mask = kept_movie_mask & kept_user_mask
    kept_movies = sorted(set(raw.rating_movies[final_mask].tolist()))
    movie_ids = np.array(kept_movies, dtype=np.int64)
    movie_index = {mid: j for j, mid in enumerate(kept_movies)}

    users = np.array([user_index[u] for u in raw.rating_users[final_mask].tolist()],
                     dtype=np.int64)
    items = np.array([movie_index[mid] for mid in raw.rating_movies[final_mask].tolist()],
                     dtype=np.int64)
    ratings = RatingSet(users, items, raw.rating_values[final_mask],
                        len(kept_users), len(kept_movies))

    disadvantaged = np.array([raw.users[uid][0] == "F" for uid in kept_users], dtype=bool)
    movie_genres = [movie_selected[mid] for mid in kept_movies]
    return FilteredDataset(ratings, GroupAssignment(disadvantaged), movie_genres,
                           user_ids, movie_ids, display_genres, min_ratings)


def genre_stats(data: FilteredDataset) -> GenreStats:
    """Movie counts, per-user rating volume, and mean given rating for each
    selected genre, split by gender.  A movie with several selected genres
    counts toward each of them.  Per-user volume divides by ALL retained
    users of that gender, raters or not."""
    female = data.groups.disadvantaged
    n_female = int(female.sum())
    n_male = data.ratings.num_users - n_female
    rating_female = female[data.ratings.users]

    order = [g for g in GENRE_TABLE_ORDER if g in data.genres]
    order += [g for g in data.genres if g not in order]
    rows = []
    for genre in order:
        movie_mask = np.array([genre in gs for gs in data.movie_genres], dtype=bool)
        in_genre = movie_mask[data.ratings.items]
        f_mask = in_genre & rating_female
        m_mask = in_genre & ~rating_female
        n_f, n_m = int(f_mask.sum()), int(m_mask.sum())
        rows.append(GenreRow(
            genre=genre,
            movie_count=int(movie_mask.sum()),
            ratings_per_female=n_f / n_female if n_female else float("nan"),
            ratings_per_male=n_m / n_male if n_male else float("nan"),
            avg_rating_female=float(data.ratings.values[f_mask].mean()) if n_f else float("nan"),
            avg_rating_male=float(data.ratings.values[m_mask].mean()) if n_m else float("nan"),
        ))
    return GenreStats(rows)


def split(data, test_fraction: float, seed: int) -> tuple[RatingSet, RatingSet]:
    """Random disjoint train/test partition of the rating entries.

    ``data`` may be a FilteredDataset or a bare RatingSet.  The test side
    gets round(n * test_fraction) entries; both sides must end up nonempty.
    """
    ratings = data.ratings if isinstance(data, FilteredDataset) else data
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie strictly between 0 and 1")
    n = len(ratings)
    n_test = int(round(n * test_fraction))
    if n_test == 0 or n_test == n:
        raise ValueError(f"test_fraction {test_fraction} leaves an empty side for {n} ratings")
    perm = np.random.default_rng(seed).permutation(n)
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    return ratings.subset(train_idx), ratings.subset(test_idx)
