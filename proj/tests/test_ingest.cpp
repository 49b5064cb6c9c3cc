#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "hetgrnn/ingest.hpp"

using namespace hetgrnn;
namespace fs = std::filesystem;

namespace {

TrialRecording make_trial(std::size_t n, std::size_t steps, double fs, int baseline_s) {
    TrialRecording t;
    t.id = "t0";
    t.signals = Matrix(n, steps);
    for (std::size_t c = 0; c < n; ++c) {
        t.channel_names.push_back("ch" + std::to_string(c));
        t.channel_modalities.push_back(c % 2 ? "EMG" : "EEG");
    }
    t.sampling_rate_hz = fs;
    t.baseline_seconds = baseline_s;
    t.rating_valence = 7.0;
    t.rating_arousal = 3.0;
    return t;
}

fs::path write_tiny_dataset(const fs::path& dir, std::size_t rows, bool write_csv = true) {
    fs::create_directories(dir);
    std::ofstream m(dir / "dataset.json");
    m << R"({"sampling_rate_hz":128,"baseline_seconds":0,
             "channels":[{"name":"a","modality":"EEG"},
                         {"name":"b","modality":"EEG"},
                         {"name":"c","modality":"EMG"}],
             "trials":[{"id":"t1","file":"t1.csv","rating_valence":6,"rating_arousal":4}]})";
    m.close();
    if (write_csv) {
        std::ofstream csv(dir / "t1.csv");
        csv << "a,b,c\n";
        for (std::size_t r = 0; r < rows; ++r)
            csv << 0.1 * r << "," << 0.2 * r << "," << 0.3 * r << "\n";
    }
    return dir / "dataset.json";
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("load_dataset maps fields directly") {
    const fs::path dir = fs::temp_directory_path() / "hetgrnn_ingest_a";
    auto trials = load_dataset(write_tiny_dataset(dir, 512));
    REQUIRE(trials.size() == 1);
    CHECK(trials[0].channels() == 3);
    CHECK(trials[0].timesteps() == 512);
    CHECK(trials[0].sampling_rate_hz == 128.0);
    CHECK(trials[0].channel_modalities[2] == "EMG");
    CHECK(trials[0].rating_valence == 6.0);
    fs::remove_all(dir);
}

TEST_CASE("load_dataset rejects a missing signal file") {
    const fs::path dir = fs::temp_directory_path() / "hetgrnn_ingest_b";
    auto manifest = write_tiny_dataset(dir, 0, false);
    CHECK_THROWS_AS(load_dataset(manifest), ValidationError);
    fs::remove_all(dir);
}

TEST_CASE("baseline_reduce subtracts the mean baseline window") {
    // fs=2 Hz, 1 s windows (T=2); baseline windows [1,1],[3,3] -> mean [2,2]
    TrialRecording t = make_trial(1, 6, 2.0, 2);
    const double vals[6] = {1, 1, 3, 3, 5, 6};
    for (int i = 0; i < 6; ++i) t.signals(0, i) = vals[i];
    TrialRecording r = baseline_reduce(t, 1.0);
    REQUIRE(r.timesteps() == 2);
    CHECK(r.signals(0, 0) == doctest::Approx(3.0));
    CHECK(r.signals(0, 1) == doctest::Approx(4.0));
}

TEST_CASE("trial equal to its baseline mean reduces to zero") {
    TrialRecording t = make_trial(2, 8, 2.0, 1);
    for (std::size_t c = 0; c < 2; ++c)
        for (int i = 0; i < 8; ++i) t.signals(c, i) = (i % 2) ? 4.0 : -1.0;
    TrialRecording r = baseline_reduce(t, 1.0);
    for (double v : r.signals.data) CHECK(v == 0.0);
    for (const Segment& s : window(r, 1.0))
        for (double v : s.signals.data) CHECK(v == 0.0);
}

TEST_CASE("DEAP-shaped trial yields 60 windows of 128 samples") {
    TrialRecording t = make_trial(3, (3 + 60) * 128, 128.0, 3);
    Rng rng(4);
    for (double& v : t.signals.data) v = rng.normal();
    TrialRecording r = baseline_reduce(t, 1.0);
    CHECK(r.timesteps() == 60 * 128);
    auto segs = window(r, 1.0);
    CHECK(segs.size() == 60);
    CHECK(segs[0].signals.cols == 128);
}

TEST_CASE("baseline_seconds=0 is a configuration error") {
    TrialRecording t = make_trial(1, 16, 2.0, 0);
    CHECK_THROWS_AS(baseline_reduce(t, 1.0), ValidationError);
}

TEST_CASE("window floors the count and discards the tail") {
    TrialRecording t = make_trial(2, 130, 128.0, 0);
    auto segs = window(t, 1.0);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].signals.cols == 128);
    // count * T + discarded == timesteps
    CHECK(segs.size() * 128 + 2 == t.timesteps());

    TrialRecording shorter = make_trial(2, 127, 128.0, 0);
    CHECK_THROWS_AS(window(shorter, 1.0), ValidationError);
}

TEST_CASE("window labels come from threshold binarization") {
    TrialRecording t = make_trial(1, 4, 2.0, 0);
    t.rating_valence = 7.2;
    t.rating_arousal = 5.0;  // boundary -> class 0
    auto segs = window(t, 1.0, 5.0);
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].label_valence == 1);
    CHECK(segs[0].label_arousal == 0);
    CHECK(segs[1].index == 1);
}

TEST_CASE("binarize_label conventions") {
    CHECK(binarize_label(7.2) == 1);
    CHECK(binarize_label(3.0) == 0);
    CHECK(binarize_label(5.0) == 0);
    CHECK_THROWS_AS(binarize_label(0.5), ValidationError);
    CHECK_THROWS_AS(binarize_label(9.5), ValidationError);
    int prev = 0;
    for (double r = 1.0; r <= 9.0; r += 0.25) {
        int b = binarize_label(r);
        CHECK(b >= prev);  // monotone non-decreasing
        prev = b;
    }
}

TEST_CASE("filter_modalities drops listed channels") {
    TrialRecording t = make_trial(4, 8, 2.0, 0);
    auto segs = window(t, 1.0);
    Segment f = filter_modalities(segs[0], {"EMG"});
    CHECK(f.signals.rows == 2);
    for (const std::string& m : f.channel_modalities) CHECK(m == "EEG");
    CHECK_THROWS_AS(filter_modalities(segs[0], {"EEG", "EMG"}), ValidationError);
}

}
