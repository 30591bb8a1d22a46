#pragma once

// Evaluation adapters and the text checkpoint format shared by networks and POM.
//
// Checkpoint layout (one token group per line, numbers printed with 17 significant digits):
//   uniord-checkpoint 1
//   model mlp | model pom
//   mlp:  input_dim <d> / hidden <n> <w_1> .. <w_n> / activation relu|tanh /
//         head <regression|softmax|unimodal|binomial> <k> <family> / seed <s>
//   pom:  dim <d> / k <k>
//   params <count>
//   <one value per line>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "uniord/errors.hpp"
#include "uniord/metrics.hpp"
#include "uniord/nn.hpp"
#include "uniord/pom.hpp"

namespace uniord {

inline constexpr int kCheckpointVersion = 1;

/// Trained network exposed through the evaluation interface.
class NetModel {
public:
  explicit NetModel(nn::Mlp mlp) : mlp_(std::move(mlp)) {}
  const nn::Mlp& mlp() const { return mlp_; }

  metrics::Prediction predict(std::span<const double> x) const {
    nn::HeadOutput out = mlp_.forward(x);
    metrics::Prediction p;
    p.cls = nn::predict_class(mlp_.head(), out);
    if (out.latent) p.sigma = out.latent->sigma;
    p.probs = std::move(out.probs);
    return p;
  }

private:
  nn::Mlp mlp_;
};

class PomModel {
public:
  explicit PomModel(pom::PomParams params) : params_(std::move(params)) { params_.validate(); }
  const pom::PomParams& params() const { return params_; }

  metrics::Prediction predict(std::span<const double> x) const {
    metrics::Prediction p;
    p.probs = pom::pom_class_probs(params_, x);
    p.cls = argmax_class(*p.probs);
    return p;
  }

private:
  pom::PomParams params_;
};

using AnyModel = std::variant<NetModel, PomModel>;

inline metrics::EvalResult evaluate_any(const AnyModel& m, const LabeledSet& split) {
  return std::visit([&](const auto& model) { return metrics::evaluate(model, split); }, m);
}

namespace detail {

inline void write_values(std::ostream& out, std::span<const double> values) {
  out << "params " << values.size() << '\n' << std::setprecision(17);
  for (double v : values) out << v << '\n';
}

inline std::vector<double> read_values(std::istream& in) {
  std::string tag;
  std::size_t n = 0;
  in >> tag >> n;
  if (tag != "params") throw IoError("checkpoint: expected 'params'");
  std::vector<double> v(n);
  for (double& x : v) in >> x;
  if (!in) throw IoError("checkpoint: truncated parameter list");
  return v;
}

template <typename T>
T expect(std::istream& in, const std::string& key) {
  std::string tag;
  T value{};
  in >> tag >> value;
  if (!in || tag != key) throw IoError("checkpoint: expected '" + key + "'");
  return value;
}

}  // namespace detail

inline void save_checkpoint(const AnyModel& model, std::ostream& out) {
  out << "uniord-checkpoint " << kCheckpointVersion << '\n';
  if (const auto* net = std::get_if<NetModel>(&model)) {
    const nn::MlpSpec& s = net->mlp().spec();
    out << "model mlp\n";
    out << "input_dim " << s.input_dim << '\n';
    out << "hidden " << s.hidden.size();
    for (int w : s.hidden) out << ' ' << w;
    out << '\n';
    out << "activation " << nn::to_string(s.activation) << '\n';
    out << "head " << nn::to_string(s.head.type) << ' ' << s.head.k << ' ' << to_string(s.head.family) << '\n';
    out << "seed " << s.seed << '\n';
    detail::write_values(out, net->mlp().params());
  } else {
    const auto& p = std::get<PomModel>(model).params();
    out << "model pom\n";
    out << "dim " << p.dim() << '\n';
    out << "k " << p.k() << '\n';
    std::vector<double> flat(p.alpha);
    flat.insert(flat.end(), p.beta.begin(), p.beta.end());
    detail::write_values(out, flat);
  }
}

inline AnyModel load_checkpoint(std::istream& in) {
  std::string magic, kind;
  int version = 0;
  in >> magic >> version;
  if (magic != "uniord-checkpoint") throw IoError("checkpoint: bad magic");
  if (version != kCheckpointVersion) throw IoError("checkpoint: unsupported version " + std::to_string(version));
  kind = detail::expect<std::string>(in, "model");
  if (kind == "mlp") {
    nn::MlpSpec s;
    s.input_dim = detail::expect<int>(in, "input_dim");
    const auto n_hidden = detail::expect<std::size_t>(in, "hidden");
    s.hidden.resize(n_hidden);
    for (int& w : s.hidden) in >> w;
    s.activation = nn::activation_from_string(detail::expect<std::string>(in, "activation"));
    std::string tag, head, family;
    in >> tag >> head >> s.head.k >> family;
    if (tag != "head") throw IoError("checkpoint: expected 'head'");
    s.head.type = nn::head_type_from_string(head);
    s.head.family = family_from_string(family);
    s.seed = detail::expect<std::uint64_t>(in, "seed");
    nn::Mlp mlp(s);
    mlp.set_params(detail::read_values(in));
    return NetModel(std::move(mlp));
  }
  if (kind == "pom") {
    const auto d = detail::expect<std::size_t>(in, "dim");
    const auto k = detail::expect<int>(in, "k");
    const auto flat = detail::read_values(in);
    if (flat.size() != d + static_cast<std::size_t>(k - 1)) throw IoError("checkpoint: pom parameter count mismatch");
    pom::PomParams p;
    p.alpha.assign(flat.begin(), flat.begin() + (k - 1));
    p.beta.assign(flat.begin() + (k - 1), flat.end());
    return PomModel(std::move(p));
  }
  throw IoError("checkpoint: unknown model kind '" + kind + "'");
}

inline void save_checkpoint(const AnyModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  save_checkpoint(model, out);
}

inline AnyModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return load_checkpoint(in);
}

}  // namespace uniord
