#include "kcrec/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "kcrec/tsv.hpp"

namespace kcrec {

namespace {

using nlohmann::json;

json mat_to_json(const Mat& m, const std::string& name) {
    if (!m.allFinite()) throw std::runtime_error("non-finite values in checkpoint tensor " + name);
    json j;
    j["rows"] = static_cast<std::int64_t>(m.rows());
    j["cols"] = static_cast<std::int64_t>(m.cols());
    json values = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) values.push_back(m(r, c));
    j["values"] = std::move(values);
    return j;
}

Mat mat_from_json(const json& j, const std::string& name) {
    auto rows = j.at("rows").get<std::int64_t>();
    auto cols = j.at("cols").get<std::int64_t>();
    const json& values = j.at("values");
    if (rows < 0 || cols < 0 || static_cast<std::int64_t>(values.size()) != rows * cols)
        throw std::runtime_error("checkpoint tensor " + name + " has inconsistent shape");
    Mat m(rows, cols);
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = values[i++].get<double>();
    return m;
}

json vec_to_json(const Vec& v, const std::string& name) {
    if (!v.allFinite()) throw std::runtime_error("non-finite values in checkpoint tensor " + name);
    json values = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) values.push_back(v[i]);
    return values;
}

Vec vec_from_json(const json& j) {
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& cp) {
    json root;
    root["version"] = kCheckpointVersion;
    root["mode"] = to_string(cp.state.mode);
    root["seed"] = cp.extras.seed;

    json blocks = json::array();
    for (std::size_t b = 0; b < cp.state.blocks.size(); ++b) {
        const BlockParams& bp = cp.state.blocks[b];
        json jb;
        jb["attention"] = {{"a", vec_to_json(bp.attn.a, "attention")},
                           {"global_mode", bp.attn.global_mode}};
        json paths = json::array();
        for (std::size_t p = 0; p < bp.stacks.size(); ++p) {
            const GcnStack& stack = bp.stacks[p];
            json jp;
            jp["name"] = bp.path_names[p];
            json widths = json::array();
            widths.push_back(static_cast<std::int64_t>(stack.weights.front().rows()));
            for (const Mat& w : stack.weights)
                widths.push_back(static_cast<std::int64_t>(w.cols()));
            jp["widths"] = std::move(widths);
            json layers = json::array();
            for (std::size_t l = 0; l < stack.weights.size(); ++l) {
                json flat = json::array();
                const Mat& w = stack.weights[l];
                if (!w.allFinite())
                    throw std::runtime_error("non-finite values in checkpoint tensor W" +
                                             std::to_string(l));
                for (Eigen::Index r = 0; r < w.rows(); ++r)
                    for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
                layers.push_back(std::move(flat));
            }
            jp["weights"] = std::move(layers);
            paths.push_back(std::move(jp));
        }
        jb["paths"] = std::move(paths);
        blocks.push_back(std::move(jb));
    }
    root["blocks"] = std::move(blocks);

    const MfParams& mf = cp.state.mf;
    if (!std::isfinite(mf.beta_user) || !std::isfinite(mf.beta_concept))
        throw std::runtime_error("non-finite values in checkpoint tensor beta");
    root["mf"] = {{"x", mat_to_json(mf.x, "x")},
                  {"y", mat_to_json(mf.y, "y")},
                  {"t_user", mat_to_json(mf.t_user, "t_user")},
                  {"t_concept", mat_to_json(mf.t_concept, "t_concept")},
                  {"beta_user", mf.beta_user},
                  {"beta_concept", mf.beta_concept}};

    root["reps"] = {{"e_user", mat_to_json(cp.extras.e_user, "e_user")},
                    {"e_concept", mat_to_json(cp.extras.e_concept, "e_concept")}};
    root["ids"] = {{"user", cp.extras.user_ids}, {"concept", cp.extras.concept_ids}};
    root["clicked"] = cp.extras.clicked;

    return root.dump() + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
    json root = json::parse(text);
    int version = root.at("version").get<int>();
    if (version != kCheckpointVersion)
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));

    Checkpoint cp;
    cp.state.mode = mode_from_string(root.at("mode").get<std::string>());
    cp.extras.seed = root.at("seed").get<std::uint64_t>();

    for (const json& jb : root.at("blocks")) {
        BlockParams bp;
        bp.attn.a = vec_from_json(jb.at("attention").at("a"));
        bp.attn.global_mode = jb.at("attention").at("global_mode").get<bool>();
        for (const json& jp : jb.at("paths")) {
            GcnStack stack;
            stack.meta_path_name = jp.at("name").get<std::string>();
            bp.path_names.push_back(stack.meta_path_name);
            const json& widths = jp.at("widths");
            const json& layers = jp.at("weights");
            if (widths.size() != layers.size() + 1)
                throw std::runtime_error("checkpoint path " + stack.meta_path_name +
                                         " has inconsistent widths");
            for (std::size_t l = 0; l < layers.size(); ++l) {
                auto rows = widths[l].get<std::int64_t>();
                auto cols = widths[l + 1].get<std::int64_t>();
                const json& flat = layers[l];
                if (static_cast<std::int64_t>(flat.size()) != rows * cols)
                    throw std::runtime_error("checkpoint path " + stack.meta_path_name + " W" +
                                             std::to_string(l) + " has inconsistent shape");
                Mat w(rows, cols);
                std::size_t i = 0;
                for (Eigen::Index r = 0; r < rows; ++r)
                    for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = flat[i++].get<double>();
                stack.weights.push_back(std::move(w));
            }
            bp.stacks.push_back(std::move(stack));
        }
        cp.state.blocks.push_back(std::move(bp));
    }

    const json& jmf = root.at("mf");
    cp.state.mf.x = mat_from_json(jmf.at("x"), "x");
    cp.state.mf.y = mat_from_json(jmf.at("y"), "y");
    cp.state.mf.t_user = mat_from_json(jmf.at("t_user"), "t_user");
    cp.state.mf.t_concept = mat_from_json(jmf.at("t_concept"), "t_concept");
    cp.state.mf.beta_user = jmf.at("beta_user").get<double>();
    cp.state.mf.beta_concept = jmf.at("beta_concept").get<double>();

    cp.extras.e_user = mat_from_json(root.at("reps").at("e_user"), "e_user");
    cp.extras.e_concept = mat_from_json(root.at("reps").at("e_concept"), "e_concept");
    cp.extras.user_ids = root.at("ids").at("user").get<std::vector<std::string>>();
    cp.extras.concept_ids = root.at("ids").at("concept").get<std::vector<std::string>>();
    cp.extras.clicked = root.at("clicked").get<std::vector<std::vector<int>>>();
    return cp;
}

void save_checkpoint(const Checkpoint& cp, const std::string& path) {
    atomic_write(path, checkpoint_to_json(cp));
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return checkpoint_from_json(buf.str());
}

}  // namespace kcrec
