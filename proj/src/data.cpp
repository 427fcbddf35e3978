#include "dascn/data.hpp"

#include "dascn/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace dascn {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "raw matrix I/O assumes a little-endian host");

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Matrix read_f32(const fs::path& path, Eigen::Index rows, Eigen::Index cols) {
    const std::string bytes = read_file(path);
    const auto expected = static_cast<std::size_t>(rows * cols) * sizeof(float);
    if (bytes.size() != expected) {
        std::ostringstream msg;
        msg << path.filename().string() << ": expected " << rows << "x" << cols << " f32 ("
            << expected << " bytes), found " << bytes.size() << " bytes";
        throw FormatError(msg.str());
    }
    Matrix m(rows, cols);
    const char* p = bytes.data();
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) {
            float v;
            std::memcpy(&v, p, sizeof v);
            p += sizeof v;
            m(i, j) = v;
        }
    return m;
}

Labels read_i32(const fs::path& path, Eigen::Index rows) {
    const std::string bytes = read_file(path);
    const auto expected = static_cast<std::size_t>(rows) * sizeof(std::int32_t);
    if (bytes.size() != expected) {
        std::ostringstream msg;
        msg << path.filename().string() << ": expected " << rows << " i32 labels (" << expected
            << " bytes), found " << bytes.size() << " bytes";
        throw FormatError(msg.str());
    }
    Labels out(static_cast<std::size_t>(rows));
    std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

template <class T>
T meta_field(const json& meta, const char* key) {
    if (!meta.contains(key)) throw FormatError(std::string("meta.json: missing field '") + key + "'");
    try {
        return meta.at(key).get<T>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("meta.json: bad field '") + key + "': " + e.what());
    }
}

void check_labels(const Labels& labels, const std::set<int>& allowed, const char* split) {
    for (int label : labels)
        if (!allowed.contains(label))
            throw ValidationError(std::string(split) + ": label " + std::to_string(label) +
                                  " is outside its class partition");
}

} // namespace

void write_f32(const fs::path& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const auto v = static_cast<float>(m(i, j));
            out.write(reinterpret_cast<const char*>(&v), sizeof v);
        }
}

void write_i32(const fs::path& path, const Labels& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    for (int label : labels) {
        const auto v = static_cast<std::int32_t>(label);
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
}

std::vector<int> DatasetBundle::all_classes() const {
    std::vector<int> out = seen_classes;
    out.insert(out.end(), unseen_classes.begin(), unseen_classes.end());
    return out;
}

void DatasetBundle::validate() const {
    const std::set<int> seen(seen_classes.begin(), seen_classes.end());
    const std::set<int> unseen(unseen_classes.begin(), unseen_classes.end());
    if (seen.size() != seen_classes.size() || unseen.size() != unseen_classes.size())
        throw ValidationError("class partition lists contain duplicates");
    if (seen.empty()) throw ValidationError("no seen classes");
    for (int c : seen)
        if (unseen.contains(c))
            throw ValidationError("class " + std::to_string(c) + " is both seen and unseen");
    for (int c : all_classes())
        if (c < 0 || c >= attributes.rows())
            throw ValidationError("class " + std::to_string(c) + " has no attribute row");

    const auto check_split = [&](const Matrix& x, const Labels& y, const char* split) {
        if (x.rows() != static_cast<Eigen::Index>(y.size()))
            throw ValidationError(std::string(split) + ": feature/label row count mismatch");
        if (x.rows() > 0 && x.cols() != visual_train.cols())
            throw ValidationError(std::string(split) + ": feature dimension mismatch");
        if (!x.allFinite()) throw ValidationError(std::string(split) + ": non-finite features");
    };
    check_split(visual_train, labels_train, "train");
    check_split(visual_test_seen, labels_test_seen, "test_seen");
    check_split(visual_test_unseen, labels_test_unseen, "test_unseen");
    if (!attributes.allFinite()) throw ValidationError("attributes: non-finite values");

    check_labels(labels_train, seen, "train");
    check_labels(labels_test_seen, seen, "test_seen");
    check_labels(labels_test_unseen, unseen, "test_unseen");
}

void SyntheticSpec::validate() const {
    if (n_seen_classes < 1 || n_unseen_classes < 1 || samples_per_class < 1)
        throw ValidationError("synthetic spec: class and sample counts must be >= 1");
    if (attribute_dim < 1 || feature_dim < attribute_dim)
        throw ValidationError("synthetic spec: need feature_dim >= attribute_dim >= 1");
    if (!(cluster_std > 0.0)) throw ValidationError("synthetic spec: cluster_std must be > 0");
}

DatasetBundle load_dataset(const fs::path& root, const std::string& split_name,
                           const LoadOptions& options) {
    const fs::path dir = split_name.empty() ? root : root / split_name;
    const json meta = [&] {
        const std::string text = read_file(dir / "meta.json");
        try {
            return json::parse(text);
        } catch (const json::exception& e) {
            throw FormatError("meta.json: " + std::string(e.what()));
        }
    }();

    const auto k = meta_field<Eigen::Index>(meta, "feature_dim");
    const auto l = meta_field<Eigen::Index>(meta, "attribute_dim");
    DatasetBundle b;
    b.seen_classes = meta_field<std::vector<int>>(meta, "seen_classes");
    b.unseen_classes = meta_field<std::vector<int>>(meta, "unseen_classes");
    const auto n_classes = meta.contains("n_classes")
                               ? meta_field<Eigen::Index>(meta, "n_classes")
                               : static_cast<Eigen::Index>(b.seen_classes.size() +
                                                           b.unseen_classes.size());
    const auto n_train = meta_field<Eigen::Index>(meta, "n_train");
    const auto n_ts = meta_field<Eigen::Index>(meta, "n_test_seen");
    const auto n_tu = meta_field<Eigen::Index>(meta, "n_test_unseen");
    if (k < 1 || l < 1) throw FormatError("meta.json: dimensions must be >= 1");

    b.visual_train = read_f32(dir / "train_X.f32", n_train, k);
    b.labels_train = read_i32(dir / "train_y.i32", n_train);
    b.visual_test_seen = read_f32(dir / "test_seen_X.f32", n_ts, k);
    b.labels_test_seen = read_i32(dir / "test_seen_y.i32", n_ts);
    b.visual_test_unseen = read_f32(dir / "test_unseen_X.f32", n_tu, k);
    b.labels_test_unseen = read_i32(dir / "test_unseen_y.i32", n_tu);
    b.attributes = read_f32(dir / "attributes.f32", n_classes, l);

    b.validate();
    if (options.normalize_features) normalize_features(b);
    return b;
}

void save_dataset(const DatasetBundle& bundle, const fs::path& root, const std::string& name) {
    bundle.validate();
    fs::create_directories(root);
    json meta;
    meta["name"] = name;
    meta["feature_dim"] = bundle.feature_dim();
    meta["attribute_dim"] = bundle.attribute_dim();
    meta["n_classes"] = bundle.n_classes();
    meta["seen_classes"] = bundle.seen_classes;
    meta["unseen_classes"] = bundle.unseen_classes;
    meta["n_train"] = bundle.visual_train.rows();
    meta["n_test_seen"] = bundle.visual_test_seen.rows();
    meta["n_test_unseen"] = bundle.visual_test_unseen.rows();
    {
        std::ofstream out(root / "meta.json");
        out << meta.dump(2) << "\n";
    }
    write_f32(root / "train_X.f32", bundle.visual_train);
    write_i32(root / "train_y.i32", bundle.labels_train);
    write_f32(root / "test_seen_X.f32", bundle.visual_test_seen);
    write_i32(root / "test_seen_y.i32", bundle.labels_test_seen);
    write_f32(root / "test_unseen_X.f32", bundle.visual_test_unseen);
    write_i32(root / "test_unseen_y.i32", bundle.labels_test_unseen);
    write_f32(root / "attributes.f32", bundle.attributes);
}

Matrix synthetic_projection(const SyntheticSpec& spec) {
    // Nonnegative entries keep class means in the nonnegative orthant, like
    // rectified backbone features.
    Rng rng(derive_seed(spec.projection_seed, "projection"));
    return rng.uniform_matrix(spec.feature_dim, spec.attribute_dim);
}

namespace {

// Values are rounded to f32 so that a save/load round trip is lossless.
double to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

} // namespace

DatasetBundle make_synthetic_dataset(const SyntheticSpec& spec) {
    spec.validate();
    const int n_total = spec.n_seen_classes + spec.n_unseen_classes;
    const int n = spec.samples_per_class;

    DatasetBundle b;
    Rng attr_rng(derive_seed(spec.projection_seed, "attributes"));
    b.attributes = attr_rng.uniform_matrix(n_total, spec.attribute_dim).unaryExpr(&to_f32);
    const Matrix projection = synthetic_projection(spec);
    // means [C x K]
    const Matrix means = b.attributes * projection.transpose();

    for (int c = 0; c < spec.n_seen_classes; ++c) b.seen_classes.push_back(c);
    for (int c = spec.n_seen_classes; c < n_total; ++c) b.unseen_classes.push_back(c);

    Rng noise(derive_seed(spec.noise_seed, "features"));
    const auto draw = [&](const std::vector<int>& classes, Matrix& x, Labels& y) {
        x.resize(static_cast<Eigen::Index>(classes.size()) * n, spec.feature_dim);
        y.clear();
        Eigen::Index row = 0;
        for (int c : classes)
            for (int i = 0; i < n; ++i, ++row) {
                for (int j = 0; j < spec.feature_dim; ++j)
                    x(row, j) = to_f32(means(c, j) + spec.cluster_std * noise.gaussian());
                y.push_back(c);
            }
    };
    draw(b.seen_classes, b.visual_train, b.labels_train);
    draw(b.seen_classes, b.visual_test_seen, b.labels_test_seen);
    draw(b.unseen_classes, b.visual_test_unseen, b.labels_test_unseen);
    b.validate();
    return b;
}

void normalize_features(DatasetBundle& bundle) {
    if (bundle.visual_train.rows() == 0) return;
    const RowVector lo = bundle.visual_train.colwise().minCoeff();
    const RowVector hi = bundle.visual_train.colwise().maxCoeff();
    RowVector range = hi - lo;
    for (Eigen::Index j = 0; j < range.size(); ++j)
        if (range(j) <= 0.0) range(j) = 1.0;
    const auto apply = [&](Matrix& x) {
        if (x.rows() == 0) return;
        x = ((x.rowwise() - lo).array().rowwise() / range.array()).matrix();
    };
    apply(bundle.visual_train);
    apply(bundle.visual_test_seen);
    apply(bundle.visual_test_unseen);
}

FeatureBatch make_batch(const DatasetBundle& bundle, const std::vector<int>& rows, Matrix noise) {
    require(noise.rows() == static_cast<Eigen::Index>(rows.size()) &&
                noise.cols() == bundle.attribute_dim(),
            "make_batch: noise must be [B x L]");
    FeatureBatch batch;
    batch.visual = gather_rows(bundle.visual_train, rows);
    batch.labels.reserve(rows.size());
    for (int r : rows) batch.labels.push_back(bundle.labels_train[static_cast<std::size_t>(r)]);
    batch.attributes = gather_rows(bundle.attributes, batch.labels);
    batch.noise = std::move(noise);
    return batch;
}

BatchIterator::BatchIterator(const DatasetBundle& bundle, int batch_size, std::uint64_t epoch_seed)
    : bundle_(&bundle), batch_size_(batch_size) {
    require(batch_size >= 1, "batch_size must be >= 1");
    require(bundle.n_train() >= 1, "batch iterator over an empty training split");
    if (batch_size_ > bundle.n_train()) {
        truncated_ = true;
        warning_ = "batch_size " + std::to_string(batch_size) + " exceeds " +
                   std::to_string(bundle.n_train()) + " training rows; using one truncated batch";
        batch_size_ = bundle.n_train();
    }
    n_batches_ = (bundle.n_train() + batch_size_ - 1) / batch_size_;
    Rng shuffle(derive_seed(epoch_seed, "shuffle"));
    order_ = shuffle.permutation(bundle.n_train());
    noise_seed_ = derive_seed(epoch_seed, "noise");
}

std::optional<FeatureBatch> BatchIterator::next() {
    if (cursor_ >= n_batches_) return std::nullopt;
    const int begin = cursor_ * batch_size_;
    const int end = std::min(begin + batch_size_, bundle_->n_train());
    std::vector<int> rows(order_.begin() + begin, order_.begin() + end);
    Rng noise(derive_seed(noise_seed_, static_cast<std::uint64_t>(cursor_)));
    ++cursor_;
    return make_batch(*bundle_, rows,
                      noise.gaussian_matrix(static_cast<Eigen::Index>(rows.size()),
                                            bundle_->attribute_dim()));
}

std::vector<FeatureBatch> epoch_batches(const DatasetBundle& bundle, int batch_size,
                                        std::uint64_t epoch_seed) {
    BatchIterator it(bundle, batch_size, epoch_seed);
    std::vector<FeatureBatch> out;
    while (auto batch = it.next()) out.push_back(std::move(*batch));
    return out;
}

std::map<int, Matrix> group_rows_by_label(const Matrix& features, const Labels& labels) {
    require(features.rows() == static_cast<Eigen::Index>(labels.size()),
            "group_rows_by_label: row/label count mismatch");
    std::map<int, std::vector<int>> index;
    for (std::size_t i = 0; i < labels.size(); ++i) index[labels[i]].push_back(static_cast<int>(i));
    std::map<int, Matrix> out;
    for (const auto& [label, rows] : index) out.emplace(label, gather_rows(features, rows));
    return out;
}

} // namespace dascn
