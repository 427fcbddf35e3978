#include "dascn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace dascn {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'D', 'A', 'S', 'C', 'N', 'C', 'K', '1'};

json shape_json(const NetworkShape& s) {
    return {{"input_dim", s.input_dim},
            {"hidden_dim", s.hidden_dim},
            {"output_dim", s.output_dim},
            {"leaky_slope", s.leaky_slope},
            {"output_activation", to_string(s.output_activation)}};
}

NetworkShape shape_from_json(const json& j) {
    NetworkShape s;
    s.input_dim = j.at("input_dim").get<int>();
    s.hidden_dim = j.at("hidden_dim").get<int>();
    s.output_dim = j.at("output_dim").get<int>();
    s.leaky_slope = j.at("leaky_slope").get<double>();
    s.output_activation = parse_output_activation(j.at("output_activation").get<std::string>());
    return s;
}

class PayloadWriter {
public:
    json add(const char* name, const Matrix& m) {
        json entry = {{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}, {"offset", bytes_.size()}};
        const auto old = bytes_.size();
        bytes_.resize(old + static_cast<std::size_t>(m.size()) * sizeof(double));
        std::memcpy(bytes_.data() + old, m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
        return entry;
    }
    const std::string& bytes() const { return bytes_; }

private:
    std::string bytes_;
};

Matrix read_tensor(const json& entry, const std::string& payload) {
    const auto rows = entry.at("rows").get<Eigen::Index>();
    const auto cols = entry.at("cols").get<Eigen::Index>();
    const auto offset = entry.at("offset").get<std::size_t>();
    const auto size = static_cast<std::size_t>(rows * cols) * sizeof(double);
    if (rows < 0 || cols < 0 || offset + size > payload.size())
        throw FormatError("checkpoint: tensor '" + entry.at("name").get<std::string>() +
                          "' runs past the payload");
    Matrix m(rows, cols);
    std::memcpy(m.data(), payload.data() + offset, size);
    return m;
}

} // namespace

void save_checkpoint(const fs::path& path, const Checkpoint& checkpoint) {
    const ModelParams& p = checkpoint.params;
    p.check_consistent();
    PayloadWriter payload;
    json networks = json::object();
    const auto add_net = [&](const char* name, const Mlp& net) {
        networks[name] = {{"shape", shape_json(net.shape)},
                          {"tensors",
                           {payload.add("w1", net.w1), payload.add("b1", net.b1),
                            payload.add("w2", net.w2), payload.add("b2", net.b2)}}};
    };
    add_net("g_sv", p.g_sv);
    add_net("g_vs", p.g_vs);
    add_net("d_v", p.d_v);
    add_net("d_s", p.d_s);
    json header = {{"format", "dascn-checkpoint"},
                   {"version", 1},
                   {"dtype", "f64"},
                   {"networks", networks},
                   {"cls_seen",
                    {{"classes", p.cls_seen.classes},
                     {"tensors",
                      {payload.add("weight", p.cls_seen.weight), payload.add("bias", p.cls_seen.bias)}}}},
                   {"metadata", checkpoint.metadata}};
    const std::string text = header.dump();
    const std::uint64_t length = text.size();

    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    out.write(kMagic, sizeof kMagic);
    out.write(reinterpret_cast<const char*>(&length), sizeof length);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.write(payload.bytes().data(), static_cast<std::streamsize>(payload.bytes().size()));
}

Checkpoint load_checkpoint(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open checkpoint " + path.string());
    const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
        throw FormatError(path.string() + ": not a checkpoint archive");
    std::uint64_t length = 0;
    std::memcpy(&length, bytes.data() + 8, sizeof length);
    if (16 + length > bytes.size()) throw FormatError(path.string() + ": truncated header");
    const std::string payload = bytes.substr(16 + length);

    Checkpoint ck;
    try {
        const json header = json::parse(bytes.substr(16, length));
        const auto read_net = [&](const char* name) {
            const json& j = header.at("networks").at(name);
            Mlp net;
            net.shape = shape_from_json(j.at("shape"));
            const json& t = j.at("tensors");
            net.w1 = read_tensor(t.at(0), payload);
            net.b1 = read_tensor(t.at(1), payload);
            net.w2 = read_tensor(t.at(2), payload);
            net.b2 = read_tensor(t.at(3), payload);
            if (net.w1.rows() != net.shape.input_dim || net.w1.cols() != net.shape.hidden_dim ||
                net.w2.rows() != net.shape.hidden_dim || net.w2.cols() != net.shape.output_dim ||
                net.b1.cols() != net.shape.hidden_dim || net.b2.cols() != net.shape.output_dim)
                throw FormatError(std::string("checkpoint: tensors of ") + name + " disagree with its shape");
            return net;
        };
        ck.params.g_sv = read_net("g_sv");
        ck.params.g_vs = read_net("g_vs");
        ck.params.d_v = read_net("d_v");
        ck.params.d_s = read_net("d_s");
        const json& cls = header.at("cls_seen");
        ck.params.cls_seen.classes = cls.at("classes").get<std::vector<int>>();
        ck.params.cls_seen.weight = read_tensor(cls.at("tensors").at(0), payload);
        ck.params.cls_seen.bias = read_tensor(cls.at("tensors").at(1), payload);
        ck.metadata = header.value("metadata", json::object());
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": malformed header: " + e.what());
    } catch (const ValidationError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    try {
        ck.params.check_consistent();
    } catch (const ContractViolation& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return ck;
}

} // namespace dascn
