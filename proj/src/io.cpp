#include "hetgrnn/io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

namespace hetgrnn {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "container format is little-endian; byte swapping not implemented");

constexpr char kMagic[8] = {'H', 'G', 'S', 'C', '0', '0', '0', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw ValidationError("truncated container file");
    return v;
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_doubles(std::istream& in, std::vector<double>& v) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!in) throw ValidationError("truncated container file");
}

}  // namespace

void save_samples(const std::vector<HeterogeneousGraphSample>& samples,
                  const std::filesystem::path& path) {
    if (samples.empty()) throw ValidationError("save_samples: nothing to save");
    const auto& first = samples[0];
    const std::uint64_t n = samples.size();
    const std::uint64_t N = first.nodes();
    const std::uint64_t T = first.st_sequence.cols;
    const std::uint64_t B = first.ss_sequence.cols;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out.write(kMagic, sizeof(kMagic));
    write_u64(out, n);
    write_u64(out, N);
    write_u64(out, T);
    write_u64(out, B);

    json index;
    index["count"] = n;
    index["nodes"] = N;
    index["t_steps"] = T;
    index["b_steps"] = B;
    index["node_modalities"] = first.node_modalities;
    index["samples"] = json::array();

    for (const auto& s : samples) {
        if (s.nodes() != N || s.st_sequence.cols != T || s.ss_sequence.cols != B ||
            s.node_modalities != first.node_modalities)
            throw ValidationError("save_samples: inhomogeneous sample shapes");
        write_doubles(out, s.adjacency.data);
        write_doubles(out, s.st_sequence.data);
        write_doubles(out, s.ss_sequence.data);
        index["samples"].push_back(json{{"trial_id", s.trial_id},
                                        {"segment_index", s.segment_index},
                                        {"label_valence", s.label_valence},
                                        {"label_arousal", s.label_arousal}});
    }
    if (!out) throw ValidationError("write failure on " + path.string());

    std::ofstream side(path.string() + ".index.json");
    side << index.dump(2) << "\n";
}

std::vector<HeterogeneousGraphSample> load_samples(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("missing container file: " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw ValidationError("bad container magic in " + path.string());
    const std::uint64_t n = read_u64(in);
    const std::uint64_t N = read_u64(in);
    const std::uint64_t T = read_u64(in);
    const std::uint64_t B = read_u64(in);

    std::ifstream side_in(path.string() + ".index.json");
    if (!side_in) throw ValidationError("missing sidecar index for " + path.string());
    json index;
    side_in >> index;
    if (index.at("count").get<std::uint64_t>() != n)
        throw ValidationError("sidecar count disagrees with container header");
    const auto modalities = index.at("node_modalities").get<std::vector<std::string>>();

    std::vector<HeterogeneousGraphSample> out(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        auto& s = out[i];
        s.node_modalities = modalities;
        s.adjacency = Matrix(N, N);
        s.st_sequence = Matrix(N, T);
        s.ss_sequence = Matrix(N, B);
        read_doubles(in, s.adjacency.data);
        read_doubles(in, s.st_sequence.data);
        read_doubles(in, s.ss_sequence.data);
        const auto& meta = index.at("samples").at(i);
        s.trial_id = meta.at("trial_id").get<std::string>();
        s.segment_index = meta.at("segment_index").get<std::size_t>();
        s.label_valence = meta.at("label_valence").get<int>();
        s.label_arousal = meta.at("label_arousal").get<int>();
    }
    return out;
}

void save_checkpoint(const ad::ParameterStore& store, const json& metadata,
                     const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["tensors"] = json::array();
    for (const ad::Parameter* p : store.params())
        manifest["tensors"].push_back(
            json{{"name", p->name}, {"rows", p->rows}, {"cols", p->cols}});
    manifest["metadata"] = metadata;

    std::ofstream mf(dir / "manifest.json");
    if (!mf) throw ValidationError("cannot write checkpoint manifest in " + dir.string());
    mf << manifest.dump(2) << "\n";

    std::ofstream bin(dir / "params.bin", std::ios::binary);
    if (!bin) throw ValidationError("cannot write params.bin in " + dir.string());
    for (const ad::Parameter* p : store.params()) write_doubles(bin, p->value);
}

json read_checkpoint_metadata(const std::filesystem::path& dir) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw ValidationError("missing checkpoint manifest: " + (dir / "manifest.json").string());
    json manifest;
    try {
        mf >> manifest;
    } catch (const json::exception& e) {
        throw ValidationError("malformed checkpoint manifest: " + std::string(e.what()));
    }
    return manifest.at("metadata");
}

json load_checkpoint(ad::ParameterStore& store, const std::filesystem::path& dir) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw ValidationError("missing checkpoint manifest: " + (dir / "manifest.json").string());
    json manifest;
    mf >> manifest;

    const auto& tensors = manifest.at("tensors");
    std::vector<std::string> manifest_names, store_names;
    for (const auto& t : tensors) manifest_names.push_back(t.at("name").get<std::string>());
    for (const ad::Parameter* p : store.params()) store_names.push_back(p->name);
    if (manifest_names != store_names) {
        std::string missing;
        for (const auto& n : store_names)
            if (std::find(manifest_names.begin(), manifest_names.end(), n) ==
                manifest_names.end())
                missing += (missing.empty() ? "" : ", ") + n;
        std::string extra;
        for (const auto& n : manifest_names)
            if (std::find(store_names.begin(), store_names.end(), n) == store_names.end())
                extra += (extra.empty() ? "" : ", ") + n;
        throw ValidationError("checkpoint parameter names do not match model; missing: [" +
                              missing + "], unexpected: [" + extra + "]");
    }

    std::ifstream bin(dir / "params.bin", std::ios::binary);
    if (!bin) throw ValidationError("missing params.bin in " + dir.string());
    for (std::size_t i = 0; i < store.params().size(); ++i) {
        ad::Parameter* p = store.params()[i];
        const auto& t = tensors.at(i);
        if (t.at("rows").get<std::size_t>() != p->rows ||
            t.at("cols").get<std::size_t>() != p->cols)
            throw ValidationError("checkpoint shape mismatch for tensor " + p->name);
        read_doubles(bin, p->value);
    }
    char probe;
    if (bin.read(&probe, 1))
        throw ValidationError("params.bin longer than manifest describes");
    return manifest.at("metadata");
}

}  // namespace hetgrnn
