#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <sstream>

#include "edlab/energy_model.hpp"
#include "edlab/io.hpp"

namespace edlab {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are written in host order; big-endian hosts unsupported");

json describe(const EnergyModel& model) {
  json spec = json::object();
  const auto& v = model.variant();
  if (const auto* m = std::get_if<Mlp>(&v)) {
    spec["input_dim"] = m->spec.input_dim;
    spec["hidden_widths"] = m->spec.hidden_widths;
    spec["activation"] = std::string(to_string(m->spec.activation));
  } else if (const auto* g = std::get_if<GaussQuad>(&v)) {
    spec["dim"] = g->mean.size();
  } else if (const auto* i = std::get_if<IsingBilinear>(&v)) {
    spec["dim"] = i->coupling.rows();
  }
  return json{{"variant", model.kind()}, {"spec", spec}, {"param_count", model.param_count()}};
}

EnergyModel skeleton(const json& header) {
  const std::string variant = header.at("variant").get<std::string>();
  const json& spec = header.at("spec");
  if (variant == "mlp") {
    MlpSpec s;
    s.input_dim = spec.at("input_dim").get<std::size_t>();
    s.hidden_widths = spec.at("hidden_widths").get<std::vector<std::size_t>>();
    s.activation = activation_from_string(spec.at("activation").get<std::string>());
    return EnergyModel::mlp(s, Params::zeros(s));
  }
  if (variant == "mixture1d") return EnergyModel::mixture1d(0.5);
  if (variant == "ising") {
    const auto d = spec.at("dim").get<std::size_t>();
    return EnergyModel::ising(Dense(d, d));
  }
  if (variant == "gauss_quad") {
    const auto d = spec.at("dim").get<std::size_t>();
    return EnergyModel::gauss_quad(std::vector<double>(d, 0.0), 1.0);
  }
  throw CheckpointError(CheckpointErrorKind::bad_header, "checkpoint: unknown variant '" + variant + "'");
}

}  // namespace

void save_checkpoint(const EnergyModel& model, const std::filesystem::path& path) {
  const Dense flat = model.params();
  std::string blob;
  blob += kCheckpointMagic;
  blob += '\n';
  blob += describe(model).dump();
  blob += '\n';
  const auto offset = blob.size();
  blob.resize(offset + flat.size() * sizeof(double));
  std::memcpy(blob.data() + offset, flat.data(), flat.size() * sizeof(double));
  write_file_atomic(path, blob);
}

EnergyModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointErrorKind::io, "checkpoint: cannot open " + path.string());
  const std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  const auto magic_end = blob.find('\n');
  if (magic_end == std::string::npos || blob.compare(0, magic_end, kCheckpointMagic) != 0) {
    throw CheckpointError(CheckpointErrorKind::bad_magic, "checkpoint: bad magic in " + path.string());
  }
  const auto header_end = blob.find('\n', magic_end + 1);
  if (header_end == std::string::npos) {
    throw CheckpointError(CheckpointErrorKind::bad_header, "checkpoint: missing header line");
  }

  json header;
  std::size_t count = 0;
  EnergyModel model = EnergyModel::mixture1d(0.5);
  try {
    header = json::parse(blob.substr(magic_end + 1, header_end - magic_end - 1));
    count = header.at("param_count").get<std::size_t>();
    model = skeleton(header);
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(CheckpointErrorKind::bad_header,
                          std::string("checkpoint: malformed header: ") + e.what());
  }

  const std::size_t payload = blob.size() - header_end - 1;
  if (payload != count * sizeof(double)) {
    throw CheckpointError(CheckpointErrorKind::length_mismatch,
                          "checkpoint: header declares " + std::to_string(count) +
                              " parameters but payload holds " + std::to_string(payload) + " bytes");
  }
  if (count != model.param_count()) {
    throw CheckpointError(CheckpointErrorKind::spec_mismatch,
                          "checkpoint: spec implies " + std::to_string(model.param_count()) +
                              " parameters, header declares " + std::to_string(count));
  }
  std::vector<double> flat(count);
  std::memcpy(flat.data(), blob.data() + header_end + 1, payload);
  try {
    model.set_params(flat);
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(CheckpointErrorKind::spec_mismatch,
                          std::string("checkpoint: invalid parameters: ") + e.what());
  }
  return model;
}

}  // namespace edlab
