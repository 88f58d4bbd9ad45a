#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "presda/eeg_io.hpp"
#include "presda/rng.hpp"

using namespace presda;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "presda_eeg_io_test";
    fs::create_directories(dir);
    return dir;
}

eeg::EegRecord make_record(std::size_t n_channels = 8, double fs = 256.0,
                           double seconds = 60.0, std::uint64_t seed = 7) {
    eeg::EegRecord rec;
    rec.record_id = "rec0";
    rec.ga_weeks = 27.5;
    rec.fs_hz = fs;
    for (std::size_t c = 0; c < n_channels; ++c)
        rec.channel_names.push_back("ch" + std::to_string(c));
    rec.n_samples = static_cast<std::size_t>(fs * seconds);
    rec.samples.resize(n_channels * rec.n_samples);
    Rng rng(seed);
    for (auto& v : rec.samples) v = static_cast<float>(rng.uniform(-100.0, 100.0));
    return rec;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(is)),
                       std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("record round trip") {
    const fs::path dir = temp_dir();
    const auto rec = make_record();
    CHECK(rec.n_samples == 15360);  // 256 Hz * 60 s

    const fs::path p = dir / "rec0.eegr";
    eeg::save_record(rec, p);
    const auto loaded = eeg::load_record(p);
    CHECK(loaded.record_id == rec.record_id);
    CHECK(loaded.ga_weeks == rec.ga_weeks);
    CHECK(loaded.channel_names == rec.channel_names);
    CHECK(loaded.samples == rec.samples);

    // save(load(p)) is bit-identical to the original file
    const fs::path p2 = dir / "rec0_again.eegr";
    eeg::save_record(loaded, p2);
    CHECK(slurp(p) == slurp(p2));
}

TEST_CASE("record invariants rejected") {
    const fs::path dir = temp_dir();
    auto rec = make_record();

    SUBCASE("ga out of bounds") {
        rec.ga_weeks = 50.0;
        CHECK_THROWS(eeg::save_record(rec, dir / "bad.eegr"));
    }
    SUBCASE("empty channel list") {
        rec.channel_names.clear();
        rec.samples.clear();
        CHECK_THROWS(eeg::save_record(rec, dir / "bad.eegr"));
    }
    SUBCASE("duplicate channel names") {
        rec.channel_names[1] = rec.channel_names[0];
        CHECK_THROWS(eeg::save_record(rec, dir / "bad.eegr"));
    }
    SUBCASE("non-finite samples") {
        rec.samples[3] = std::numeric_limits<float>::quiet_NaN();
        CHECK_THROWS(eeg::save_record(rec, dir / "bad.eegr"));
    }
    SUBCASE("unwritable path") {
        CHECK_THROWS(eeg::save_record(rec, "/nonexistent_dir_zz/x.eegr"));
    }
}

TEST_CASE("malformed record files") {
    const fs::path dir = temp_dir();
    const auto rec = make_record(2, 256.0, 2.0);
    const fs::path p = dir / "trunc.eegr";
    eeg::save_record(rec, p);

    SUBCASE("truncated samples") {
        std::string bytes = slurp(p);
        bytes.resize(bytes.size() - 8);
        std::ofstream os(p, std::ios::binary | std::ios::trunc);
        os << bytes;
        os.close();
        CHECK_THROWS_WITH_AS(eeg::load_record(p),
                             doctest::Contains("sample count mismatch"),
                             std::runtime_error);
    }
    SUBCASE("bad header") {
        std::ofstream os(p, std::ios::binary | std::ios::trunc);
        os << "not json\n";
        os.close();
        CHECK_THROWS(eeg::load_record(p));
    }
}

TEST_CASE("annotations load, sort, merge") {
    const fs::path dir = temp_dir();
    const fs::path p = dir / "ann.csv";

    SUBCASE("two disjoint events") {
        std::ofstream(p) << "onset_s,offset_s\n5,40\n100,130\n";
        const auto ann = eeg::load_annotations(p);
        REQUIRE(ann.size() == 2);
        CHECK(ann.events()[0].onset_s == 5.0);
        CHECK(ann.events()[1].offset_s == 130.0);
    }
    SUBCASE("overlapping events merge") {
        std::ofstream(p) << "onset_s,offset_s\n5,40\n30,60\n";
        const auto ann = eeg::load_annotations(p);
        REQUIRE(ann.size() == 1);
        CHECK(ann.events()[0].onset_s == 5.0);
        CHECK(ann.events()[0].offset_s == 60.0);
    }
    SUBCASE("overlap under error policy") {
        std::ofstream(p) << "onset_s,offset_s\n5,40\n30,60\n";
        CHECK_THROWS(eeg::load_annotations(p, eeg::AnnotationSet::OverlapPolicy::Error));
    }
    SUBCASE("event shorter than 10 s rejected") {
        std::ofstream(p) << "onset_s,offset_s\n5,12\n";
        CHECK_THROWS(eeg::load_annotations(p));
    }
    SUBCASE("offset before onset rejected") {
        std::ofstream(p) << "onset_s,offset_s\n40,20\n";
        CHECK_THROWS(eeg::load_annotations(p));
    }
    SUBCASE("unsorted input comes back sorted and disjoint") {
        std::ofstream(p) << "onset_s,offset_s\n200,230\n5,40\n35,80\n";
        const auto ann = eeg::load_annotations(p);
        REQUIRE(ann.size() == 2);
        CHECK(ann.events()[0].offset_s == 80.0);
        for (std::size_t i = 1; i < ann.size(); ++i)
            CHECK(ann.events()[i].onset_s > ann.events()[i - 1].offset_s);
        for (const auto& e : ann.events()) CHECK(e.duration_s() >= 10.0);
    }
}

TEST_CASE("annotation overlap helper") {
    const auto ann = eeg::AnnotationSet::from_events({{10.0, 30.0}, {50.0, 70.0}});
    CHECK(ann.overlap_with(0.0, 10.0) == 0.0);
    CHECK(ann.overlap_with(15.0, 25.0) == doctest::Approx(10.0));
    CHECK(ann.overlap_with(25.0, 55.0) == doctest::Approx(10.0));
    CHECK(ann.total_seizure_s() == doctest::Approx(40.0));
}

TEST_CASE("manifest validation") {
    const fs::path dir = temp_dir() / "manifest";
    fs::create_directories(dir);
    auto rec = make_record(4, 256.0, 30.0);
    rec.record_id = "a";
    eeg::save_record(rec, dir / "a.eegr");
    rec.record_id = "b";
    eeg::save_record(rec, dir / "b.eegr");
    std::ofstream(dir / "a.csv") << "onset_s,offset_s\n5,20\n";
    std::ofstream(dir / "b.csv") << "onset_s,offset_s\n";

    eeg::DatasetManifest m;
    m.base_dir = dir;
    m.entries = {{"a.eegr", "a.csv", 27.5, "train"},
                 {"b.eegr", "b.csv", 27.5, "test"}};

    SUBCASE("all entries valid") {
        const auto report = eeg::validate_manifest(m);
        CHECK(report.ok());
        CHECK(report.entries_checked == 2);
    }
    SUBCASE("missing file named in failure") {
        m.entries.push_back({"missing.eegr", "", 25.0, "test"});
        const auto report = eeg::validate_manifest(m);
        REQUIRE(report.failures.size() == 1);
        CHECK(report.failures[0].path == "missing.eegr");
    }
    SUBCASE("duplicate record id") {
        m.entries.push_back({"a.eegr", "a.csv", 27.5, "test"});
        const auto report = eeg::validate_manifest(m);
        REQUIRE(!report.ok());
        CHECK(report.failures[0].reason.find("duplicate") != std::string::npos);
    }
    SUBCASE("ga mismatch") {
        m.entries[0].ga_weeks = 30.0;
        CHECK(!eeg::validate_manifest(m).ok());
    }
    SUBCASE("required split empty") {
        const auto report = eeg::validate_manifest(m, {"val"});
        REQUIRE(!report.ok());
        CHECK(report.failures[0].reason.find("val") != std::string::npos);
    }
    SUBCASE("annotation past record end") {
        std::ofstream(dir / "a.csv") << "onset_s,offset_s\n5,4000\n";
        CHECK(!eeg::validate_manifest(m).ok());
    }

    SUBCASE("manifest file round trip") {
        eeg::save_manifest(m, dir / "manifest.json");
        const auto loaded = eeg::load_manifest(dir / "manifest.json");
        REQUIRE(loaded.entries.size() == m.entries.size());
        CHECK(loaded.entries[0].record_path == "a.eegr");
        CHECK(loaded.split("train").size() == 1);
        CHECK(loaded.split("*").size() == 2);
    }
}
