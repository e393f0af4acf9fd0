import numpy as np
import pytest

from conftest import make_track, write_ucr_dataset
from geostat.features import GeoStatConfig
from geostat.ingest import (
    VESSEL_DISTRIBUTIONS,
    VesselTrack,
    binary_fishing_labels,
    filter_labels,
    load_ucr,
    load_vessels,
    parse_ucr_file,
    segment_vessel,
    vessel_feature_matrix,
    vessel_features,
)
from geostat.stats import MULTIVARIATE_QUANTILES, SummaryConfig


def vessel_cfg():
    return GeoStatConfig(summary=SummaryConfig(quantiles=MULTIVARIATE_QUANTILES))


class TestParseUCR:
    def test_basic_row(self, tmp_path):
        path = tmp_path / "x.tsv"
        path.write_text("2\t0.1\t0.2\n")
        labels, series = parse_ucr_file(path)
        assert labels == ["2"]
        np.testing.assert_allclose(series[0], [0.1, 0.2])

    def test_row_count(self, tmp_path):
        path = tmp_path / "x.tsv"
        path.write_text("1\t0.0\t1.0\n2\t2.0\t3.0\n")
        labels, _ = parse_ucr_file(path)
        assert len(labels) == 2

    def test_missing_interior_value_interpolated(self, tmp_path):
        path = tmp_path / "x.tsv"
        path.write_text("1\t0.0\tNaN\t2.0\n")
        _, series = parse_ucr_file(path)
        np.testing.assert_allclose(series[0], [0.0, 1.0, 2.0])

    def test_missing_edge_value_held(self, tmp_path):
        path = tmp_path / "x.tsv"
        path.write_text("1\t?\t1.0\t2.0\t\n")
        _, series = parse_ucr_file(path)
        np.testing.assert_allclose(series[0], [1.0, 1.0, 2.0, 2.0])

    def test_comma_delimiter_autodetected(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("1,0.5,0.75\n")
        labels, series = parse_ucr_file(path)
        assert labels == ["1"]
        np.testing.assert_allclose(series[0], [0.5, 0.75])

    def test_bad_value_reports_line(self, tmp_path):
        path = tmp_path / "x.tsv"
        path.write_text("1\t0.0\n2\t0.0\toops\n")
        with pytest.raises(ValueError, match=r":2:"):
            parse_ucr_file(path)

    def test_unequal_lengths_allowed(self, tmp_path):
        path = tmp_path / "x.tsv"
        path.write_text("1\t0.0\t1.0\n2\t0.0\t1.0\t2.0\t3.0\n")
        _, series = parse_ucr_file(path)
        assert [len(s) for s in series] == [2, 4]


class TestLoadUCR:
    def test_loads_directory(self, tmp_path):
        d = write_ucr_dataset(tmp_path / "Toy", "Toy",
                              [("1", [0.0, 1.0, 2.0]), ("2", [5.0, 4.0, 3.0])],
                              [("1", [0.1, 1.1, 2.1])])
        ds = load_ucr(d)
        assert ds.name == "Toy"
        assert len(ds.train_series) == 2
        assert len(ds.test_series) == 1
        assert ds.classes == ("1", "2")
        assert ds.equal_length

    def test_missing_split_rejected(self, tmp_path):
        (tmp_path / "Empty").mkdir()
        with pytest.raises(FileNotFoundError):
            load_ucr(tmp_path / "Empty")


class TestSegmentVessel:
    def test_gap_splits_and_is_recorded(self):
        track = make_track([(10, 5.0), (10, 5.0)], gap=6000.0)
        seg = segment_vessel(track)
        assert len(seg.active) == 2
        assert seg.gap_durations == (6000.0,)
        assert seg.inactive_durations == ()

    def test_all_slow_yields_one_inactive_period(self):
        track = make_track([(12, 0.1)])
        seg = segment_vessel(track)
        assert seg.active == ()
        assert len(seg.inactive_durations) == 1
        assert seg.inactive_durations[0] == pytest.approx(11 * 300.0)

    def test_short_active_run_dropped(self):
        # 3 moving samples between long stops: below the 4-timestamp floor.
        track = make_track([(6, 0.1)], gap=0)
        t = np.concatenate([track.timestamps,
                            track.timestamps[-1] + 300.0 * np.arange(1, 4),
                            track.timestamps[-1] + 300.0 * np.arange(4, 10)])
        speeds = np.concatenate([np.full(6, 0.1), np.full(3, 5.0),
                                 np.full(6, 0.1)])
        track = VesselTrack("v", "trawlers", t, np.full(15, 10.0),
                            np.full(15, 20.0), speeds, np.zeros(15),
                            np.zeros(15))
        seg = segment_vessel(track)
        assert seg.active == ()
        assert len(seg.dropped_spans) == 1

    def test_threshold_is_inclusive(self):
        speeds = np.array([0.4, 0.4, 0.4, 0.4, 0.4])
        t = 300.0 * np.arange(5)
        track = VesselTrack("v", "x", t, np.linspace(10, 10.1, 5),
                            np.full(5, 20.0), speeds, np.zeros(5), np.zeros(5))
        seg = segment_vessel(track)
        assert len(seg.active) == 1

    def test_gap_threshold_boundary(self):
        t = np.array([0.0, 5400.0, 5700.0])
        track = VesselTrack("v", "x", t, np.full(3, 10.0), np.full(3, 20.0),
                            np.full(3, 5.0), np.zeros(3), np.zeros(3))
        seg = segment_vessel(track)
        assert seg.gap_durations == (5400.0,)

    def test_conservation_of_time(self):
        rng = np.random.default_rng(0)
        for seed in range(5):
            rng = np.random.default_rng(seed)
            n = 60
            dts = rng.choice([120.0, 300.0, 900.0, 7000.0], size=n - 1)
            t = np.concatenate([[0.0], np.cumsum(dts)])
            speeds = rng.choice([0.1, 3.0], size=n)
            track = VesselTrack("v", "x", t, np.full(n, 10.0),
                                np.full(n, 20.0), speeds, np.zeros(n),
                                np.zeros(n))
            seg = segment_vessel(track)
            total = (sum(s.span for s in seg.active)
                     + sum(seg.inactive_durations)
                     + sum(seg.gap_durations)
                     + sum(seg.dropped_spans))
            assert total == pytest.approx(track.span)

    def test_deterministic(self):
        track = make_track([(10, 5.0), (8, 0.1), (10, 5.0)])
        a = segment_vessel(track)
        b = segment_vessel(track)
        assert a.gap_durations == b.gap_durations
        assert a.inactive_durations == b.inactive_durations
        assert [s.n_samples for s in a.active] == [s.n_samples for s in b.active]

    def test_single_sample_track_is_empty(self):
        track = VesselTrack("v", "x", [0.0], [10.0], [20.0], [5.0], [0.0], [0.0])
        seg = segment_vessel(track)
        assert seg.active == () and seg.total_span == 0.0


class TestFilterLabels:
    def test_unlabeled_removed(self):
        good = make_track([(10, 5.0), (6, 0.1)])
        bad = VesselTrack("v", "", good.timestamps, good.lats, good.lons,
                          good.speeds, good.shore_distances,
                          good.port_distances)
        assert filter_labels([good, bad]) == [good]

    def test_drop_list_removed(self):
        tracks = [make_track([(10, 5.0), (6, 0.1)], label=l)
                  for l in ("trawlers", "unknown", "gear_buoy", "other_fishing")]
        kept = filter_labels(tracks)
        assert [t.label for t in kept] == ["trawlers"]

    def test_always_active_no_gap_removed(self):
        lively = make_track([(20, 5.0)], gap=0)  # one run, always moving
        assert filter_labels([lively]) == []

    def test_track_with_gap_but_no_inactivity_kept(self):
        track = make_track([(10, 5.0), (10, 5.0)], gap=6000.0)
        assert filter_labels([track]) == [track]


class TestVesselFeatures:
    def test_schema_and_length(self):
        track = make_track([(20, 5.0), (6, 0.1), (12, 3.0)])
        vec, labels = vessel_features(segment_vessel(track), vessel_cfg())
        assert len(vec) == 3 + 9 * 16
        dists = []
        for d, _, _ in labels:
            if d not in dists:
                dists.append(d)
        assert tuple(dists) == VESSEL_DISTRIBUTIONS

    def test_near_constant_velocity_track_low_curvature(self):
        # Steady drift along the equator: tiny curvature at both scales.
        n = 200
        t = 300.0 * np.arange(n)
        track = VesselTrack("v", "x", t, np.zeros(n),
                            np.linspace(20.0, 21.0, n), np.full(n, 5.0),
                            np.zeros(n), np.zeros(n))
        vec, labels = vessel_features(segment_vessel(track), vessel_cfg())
        by_label = dict(zip(labels, vec))
        assert abs(by_label[("curvature", 0, "mean")]) < 1e-6
        assert abs(by_label[("curvature_raw", 0, "mean")]) < 1e-6
        assert by_label[("speed", 0, "std")] < 1e-6

    def test_inactive_duration_mean(self):
        seg = segment_vessel(make_track([(10, 5.0), (6, 0.1)]))
        vec, labels = vessel_features(seg, vessel_cfg())
        by_label = dict(zip(labels, vec))
        assert by_label[("inactive_duration", 0, "mean")] == pytest.approx(
            np.mean(seg.inactive_durations))

    def test_no_active_segments_zero_filled(self):
        seg = segment_vessel(make_track([(12, 0.1)]))
        vec, labels = vessel_features(seg, vessel_cfg())
        by_label = dict(zip(labels, vec))
        assert by_label[("position", 0, "frechet_var")] == 0.0
        assert by_label[("speed", 0, "mean")] == 0.0
        assert by_label[("inactive_duration", 0, "mean")] > 0

    def test_matrix_assembly(self):
        tracks = [make_track([(20, 5.0), (6, 0.1)], label="trawlers"),
                  make_track([(15, 3.0), (8, 0.1)], label="reefers")]
        fm = vessel_feature_matrix(tracks, vessel_cfg())
        assert fm.rows.shape == (2, 147)
        assert fm.labels == ("trawlers", "reefers")


class TestLoadVessels:
    def test_csv_roundtrip(self, tmp_path):
        path = tmp_path / "trawlers.csv"
        path.write_text(
            "mmsi,timestamp,lat,lon,speed,distance_from_shore,distance_from_port,label\n"
            "7,0,10.0,20.0,5.0,100,200,trawlers\n"
            "7,300,10.1,20.1,5.0,100,200,trawlers\n"
            "8,0,30.0,40.0,0.1,50,60,trawlers\n")
        tracks = load_vessels(path)
        assert [t.vessel_id for t in tracks] == ["7", "8"]
        assert tracks[0].n_samples == 2

    def test_label_falls_back_to_file_stem(self, tmp_path):
        path = tmp_path / "purse_seines.csv"
        path.write_text(
            "mmsi,timestamp,lat,lon,speed,distance_from_shore,distance_from_port\n"
            "9,0,1.0,2.0,3.0,4,5\n")
        tracks = load_vessels(path)
        assert tracks[0].label == "purse_seines"

    def test_directory_of_files(self, tmp_path):
        for name in ("a.csv", "b.csv"):
            (tmp_path / name).write_text(
                "mmsi,timestamp,lat,lon,speed,distance_from_shore,distance_from_port\n"
                "1,0,1.0,2.0,3.0,4,5\n")
        assert len(load_vessels(tmp_path)) == 2

    def test_missing_column_rejected(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("mmsi,timestamp,lat,lon\n1,0,1.0,2.0\n")
        with pytest.raises(ValueError):
            load_vessels(path)

    def test_column_remapping(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("id,ts,latitude,longitude,sog,shore,port\n"
                        "1,0,1.0,2.0,3.0,4,5\n")
        tracks = load_vessels(path, columns={
            "vessel_id": "id", "timestamp": "ts", "lat": "latitude",
            "lon": "longitude", "speed": "sog", "shore": "shore",
            "port": "port"})
        assert tracks[0].lats[0] == 1.0


class TestBinaryLabels:
    def test_maps_classes(self):
        out = binary_fishing_labels(["trawlers", "reefers"],
                                    {"trawlers": "fishing",
                                     "reefers": "non_fishing"})
        assert out == ("fishing", "non_fishing")

    def test_missing_entry_rejected(self):
        with pytest.raises(ValueError):
            binary_fishing_labels(["tug"], {"trawlers": "fishing"})
