#include "presda/eeg_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "presda/binio.hpp"

namespace presda::eeg {

using nlohmann::json;

// ---- AnnotationSet ----

AnnotationSet AnnotationSet::from_events(std::vector<SeizureEvent> events,
                                         OverlapPolicy policy) {
    for (const auto& e : events) {
        if (e.onset_s < 0.0)
            throw std::invalid_argument("annotation: negative onset " +
                                        std::to_string(e.onset_s));
        if (e.offset_s <= e.onset_s)
            throw std::invalid_argument("annotation: offset <= onset at " +
                                        std::to_string(e.onset_s));
        if (e.duration_s() < kMinSeizureSeconds)
            throw std::invalid_argument(
                "annotation: event at " + std::to_string(e.onset_s) + " lasts " +
                std::to_string(e.duration_s()) + " s, minimum is 10 s");
    }
    std::sort(events.begin(), events.end(),
              [](const SeizureEvent& a, const SeizureEvent& b) {
                  return a.onset_s < b.onset_s;
              });
    AnnotationSet out;
    for (const auto& e : events) {
        if (!out.events_.empty() && e.onset_s <= out.events_.back().offset_s) {
            if (policy == OverlapPolicy::Error)
                throw std::invalid_argument("annotation: overlapping events at " +
                                            std::to_string(e.onset_s));
            if (e.onset_s < out.events_.back().offset_s)
                std::cerr << "[presda] warning: merging overlapping seizure events at "
                          << e.onset_s << " s\n";
            out.events_.back().offset_s =
                std::max(out.events_.back().offset_s, e.offset_s);
        } else {
            out.events_.push_back(e);
        }
    }
    return out;
}

double AnnotationSet::total_seizure_s() const {
    double s = 0.0;
    for (const auto& e : events_) s += e.duration_s();
    return s;
}

double AnnotationSet::overlap_with(double a, double b) const {
    double s = 0.0;
    for (const auto& e : events_) {
        if (e.offset_s <= a) continue;
        if (e.onset_s >= b) break;
        s += std::min(b, e.offset_s) - std::max(a, e.onset_s);
    }
    return s;
}

// ---- EegRecord ----

void EegRecord::validate() const {
    if (record_id.empty())
        throw std::invalid_argument("record: empty record_id");
    if (channel_names.empty())
        throw std::invalid_argument("record " + record_id + ": no channels");
    if (n_samples == 0)
        throw std::invalid_argument("record " + record_id + ": no samples");
    if (!(fs_hz > 0.0))
        throw std::invalid_argument("record " + record_id + ": fs_hz must be > 0");
    if (ga_weeks < 22.0 || ga_weeks > 44.0)
        throw std::invalid_argument("record " + record_id + ": ga_weeks " +
                                    std::to_string(ga_weeks) +
                                    " outside [22, 44]");
    std::set<std::string> names(channel_names.begin(), channel_names.end());
    if (names.size() != channel_names.size())
        throw std::invalid_argument("record " + record_id +
                                    ": duplicate channel names");
    if (samples.size() != channel_names.size() * n_samples)
        throw std::invalid_argument("record " + record_id +
                                    ": sample buffer size mismatch");
    for (float v : samples)
        if (!std::isfinite(v))
            throw std::invalid_argument("record " + record_id +
                                        ": non-finite sample value");
    if (!annotations.empty() &&
        annotations.events().back().offset_s > duration_s() + 1e-9)
        throw std::invalid_argument("record " + record_id +
                                    ": annotation extends past record end");
}

// ---- record file ----

EegRecord load_record(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open record file " + path.string());

    std::string header_line;
    if (!std::getline(is, header_line))
        throw std::runtime_error(path.string() + ": missing header line");

    json h;
    try {
        h = json::parse(header_line);
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": malformed header: " + e.what());
    }
    static const std::set<std::string> known = {"channel_names", "fs_hz",
                                                "ga_weeks", "n_samples",
                                                "record_id"};
    for (auto it = h.begin(); it != h.end(); ++it)
        if (!known.count(it.key()))
            throw std::runtime_error(path.string() + ": unknown header key '" +
                                     it.key() + "'");

    EegRecord rec;
    try {
        rec.record_id = h.at("record_id").get<std::string>();
        rec.ga_weeks = h.at("ga_weeks").get<double>();
        rec.fs_hz = h.at("fs_hz").get<double>();
        rec.channel_names = h.at("channel_names").get<std::vector<std::string>>();
        rec.n_samples = h.at("n_samples").get<std::size_t>();
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": malformed header: " + e.what());
    }

    const std::size_t total = rec.channel_names.size() * rec.n_samples;
    rec.samples.resize(total);
    try {
        read_f32(is, rec.samples.data(), total);
    } catch (const std::exception&) {
        throw std::runtime_error(path.string() + ": sample count mismatch");
    }
    if (is.peek() != std::char_traits<char>::eof())
        throw std::runtime_error(path.string() + ": trailing bytes after samples");

    rec.validate();
    return rec;
}

void save_record(const EegRecord& record, const std::filesystem::path& path) {
    record.validate();
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write record file " + path.string());

    json h;
    h["record_id"] = record.record_id;
    h["ga_weeks"] = record.ga_weeks;
    h["fs_hz"] = record.fs_hz;
    h["channel_names"] = record.channel_names;
    h["n_samples"] = record.n_samples;
    os << h.dump() << '\n';
    write_f32(os, record.samples.data(), record.samples.size());
    if (!os) throw std::runtime_error("I/O failure writing " + path.string());
}

// ---- annotation CSV ----

AnnotationSet load_annotations(const std::filesystem::path& path,
                               AnnotationSet::OverlapPolicy policy) {
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("cannot open annotation file " + path.string());

    std::string line;
    if (!std::getline(is, line) || line.rfind("onset_s,offset_s", 0) != 0)
        throw std::runtime_error(path.string() +
                                 ": expected header 'onset_s,offset_s'");

    std::vector<SeizureEvent> events;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        SeizureEvent e;
        char comma = 0;
        if (!(ss >> e.onset_s >> comma >> e.offset_s) || comma != ',')
            throw std::runtime_error(path.string() + ":" +
                                     std::to_string(line_no) + ": malformed row");
        events.push_back(e);
    }
    try {
        return AnnotationSet::from_events(std::move(events), policy);
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

void save_annotations(const AnnotationSet& annotations,
                      const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os)
        throw std::runtime_error("cannot write annotation file " + path.string());
    os << "onset_s,offset_s\n";
    char buf[80];
    for (const auto& e : annotations.events()) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", e.onset_s, e.offset_s);
        os << buf;
    }
    if (!os) throw std::runtime_error("I/O failure writing " + path.string());
}

EegRecord load_record_with_annotations(
    const std::filesystem::path& record_path,
    const std::filesystem::path& annotation_path) {
    EegRecord rec = load_record(record_path);
    rec.annotations = load_annotations(annotation_path);
    rec.validate();
    return rec;
}

// ---- manifest ----

std::filesystem::path DatasetManifest::resolve(const std::string& p) const {
    std::filesystem::path fp(p);
    if (fp.is_absolute()) return fp;
    return base_dir / fp;
}

std::vector<const ManifestEntry*> DatasetManifest::split(
    const std::string& tag) const {
    std::vector<const ManifestEntry*> out;
    for (const auto& e : entries)
        if (tag == "*" || e.split == tag) out.push_back(&e);
    return out;
}

static bool valid_split_tag(const std::string& s) {
    return s == "train" || s == "val" || s == "test";
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open manifest " + path.string());
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": malformed manifest: " +
                                 e.what());
    }
    if (!j.is_array())
        throw std::runtime_error(path.string() + ": manifest must be a JSON array");

    DatasetManifest m;
    m.base_dir = std::filesystem::absolute(path).parent_path();
    for (const auto& item : j) {
        ManifestEntry e;
        try {
            e.record_path = item.at("record").get<std::string>();
            e.ga_weeks = item.at("ga_weeks").get<double>();
            e.split = item.at("split").get<std::string>();
            if (item.contains("annotations") && !item["annotations"].is_null())
                e.annotation_path = item["annotations"].get<std::string>();
        } catch (const json::exception& ex) {
            throw std::runtime_error(path.string() + ": bad manifest entry: " +
                                     ex.what());
        }
        if (!valid_split_tag(e.split))
            throw std::runtime_error(path.string() + ": bad split tag '" +
                                     e.split + "'");
        m.entries.push_back(std::move(e));
    }
    return m;
}

void save_manifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path) {
    json j = json::array();
    for (const auto& e : manifest.entries) {
        json item;
        item["record"] = e.record_path;
        item["annotations"] = e.annotation_path;
        item["ga_weeks"] = e.ga_weeks;
        item["split"] = e.split;
        j.push_back(item);
    }
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write manifest " + path.string());
    os << j.dump(2) << '\n';
}

ManifestReport validate_manifest(const DatasetManifest& manifest,
                                 const std::vector<std::string>& required_splits) {
    ManifestReport report;
    std::set<std::string> seen_ids;
    std::set<std::string> nonempty_splits;

    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        const auto& e = manifest.entries[i];
        ++report.entries_checked;
        auto fail = [&](const std::string& why) {
            report.failures.push_back({i, e.record_path, why});
        };

        EegRecord rec;
        try {
            rec = load_record(manifest.resolve(e.record_path));
        } catch (const std::exception& ex) {
            fail(ex.what());
            continue;
        }
        if (std::abs(rec.ga_weeks - e.ga_weeks) > 1e-9)
            fail("ga_weeks mismatch: manifest " + std::to_string(e.ga_weeks) +
                 " vs record " + std::to_string(rec.ga_weeks));
        if (!seen_ids.insert(rec.record_id).second)
            fail("duplicate record_id '" + rec.record_id + "'");

        if (!e.annotation_path.empty()) {
            try {
                auto ann = load_annotations(manifest.resolve(e.annotation_path));
                if (!ann.empty() &&
                    ann.events().back().offset_s > rec.duration_s() + 1e-9)
                    fail("annotation extends past record end");
            } catch (const std::exception& ex) {
                fail(ex.what());
            }
        }
        nonempty_splits.insert(e.split);
    }

    for (const auto& s : required_splits)
        if (!nonempty_splits.count(s))
            report.failures.push_back(
                {manifest.entries.size(), "", "required split '" + s + "' is empty"});
    return report;
}

}  // namespace presda::eeg
