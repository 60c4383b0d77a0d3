#include "faast/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include "faast/errors.hpp"
#include "faast/io_util.hpp"

namespace faast {

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
    nlohmann::json j;
    j["format"] = "faast.checkpoint";
    j["version"] = 1;
    j["model"] = {{"kind", model_kind_name(checkpoint.model.kind)},
                  {"dim", checkpoint.model.dim},
                  {"steps", checkpoint.model.steps},
                  {"flip_match_sign", checkpoint.model.flip_match_sign}};
    j["hyper"] = {{"lr", checkpoint.hyper.lr},
                  {"batch_size", checkpoint.hyper.batch_size},
                  {"epochs", checkpoint.hyper.epochs},
                  {"balance_ratio", checkpoint.hyper.balance_ratio},
                  {"min_count", checkpoint.hyper.min_count}};
    j["seed"] = checkpoint.seed;
    j["vocab"] = checkpoint.vocab.labels();
    nlohmann::json params;
    for (const auto& [name, p] : checkpoint.params) {
        std::vector<double> data(static_cast<size_t>(p.value.size()));
        // row-major serialization
        for (int r = 0; r < p.value.rows(); ++r)
            for (int c = 0; c < p.value.cols(); ++c)
                data[static_cast<size_t>(r) * static_cast<size_t>(p.value.cols()) +
                     static_cast<size_t>(c)] = p.value(r, c);
        params[name] = {{"rows", p.value.rows()}, {"cols", p.value.cols()}, {"data", data}};
    }
    j["params"] = std::move(params);
    io::atomic_write(path, j.dump() + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::Io, "bad checkpoint '" + path + "': " + e.what());
    }
    if (j.value("format", "") != "faast.checkpoint")
        raise(ErrorCode::Io, "not a checkpoint file: " + path);

    Checkpoint out;
    try {
        out.model.kind = model_kind_from_name(j.at("model").at("kind").get<std::string>());
        out.model.dim = j.at("model").at("dim").get<int>();
        out.model.steps = j.at("model").at("steps").get<int>();
        out.model.flip_match_sign = j.at("model").value("flip_match_sign", false);
        out.hyper.lr = j.at("hyper").at("lr").get<double>();
        out.hyper.batch_size = j.at("hyper").at("batch_size").get<int>();
        out.hyper.epochs = j.at("hyper").at("epochs").get<int>();
        out.hyper.balance_ratio = j.at("hyper").at("balance_ratio").get<double>();
        out.hyper.min_count = j.at("hyper").at("min_count").get<int>();
        out.seed = j.at("seed").get<std::uint64_t>();
        out.vocab = Vocabulary(j.at("vocab").get<std::vector<std::string>>());
        for (auto& [name, pj] : j.at("params").items()) {
            int rows = pj.at("rows").get<int>();
            int cols = pj.at("cols").get<int>();
            const auto& data = pj.at("data");
            if (static_cast<int>(data.size()) != rows * cols)
                raise(ErrorCode::Io, "checkpoint param '" + name + "' has wrong size");
            Eigen::MatrixXd& m = out.params.add(name, rows, cols);
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c)
                    m(r, c) = data[static_cast<size_t>(r) * static_cast<size_t>(cols) +
                                   static_cast<size_t>(c)]
                                  .get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::Io, "bad checkpoint '" + path + "': " + e.what());
    }
    out.model.validate();
    return out;
}

}  // namespace faast
