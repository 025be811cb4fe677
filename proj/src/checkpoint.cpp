// Text checkpoint of a Spike-Kal network, version 1:
//
//   spikekal-snn-checkpoint 1
//   n_in <int>
//   n_out <int>
//   tau_membrane <s>
//   tau_input <s>
//   tau_current <s>
//   v_rest <v>
//   v_thresh <v>
//   v_reset <v>
//   snn_dt <s>
//   tau_decoder <s>
//   lms_rate <x>
//   weights
//   <n_out rows of n_in space-separated values>
//   decoder_gain <n_out values>
//   decoder_bias <n_out values>
//
// Values are written with 17 significant digits so load(save(c)) == c.

#include "spikekal/errors.hpp"
#include "spikekal/spikekal_filter.hpp"
#include "spikekal/text_format.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace spikekal {

namespace {

constexpr const char* kMagic = "spikekal-snn-checkpoint";

void write_row(std::ostream& out, const Eigen::VectorXd& row) {
  for (Eigen::Index i = 0; i < row.size(); ++i) {
    out << (i == 0 ? "" : " ") << format_double(row[i]);
  }
  out << '\n';
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::istringstream next() {
    std::string line;
    if (!std::getline(in_, line)) {
      throw ParseError("unexpected end of checkpoint", line_ + 1);
    }
    ++line_;
    return std::istringstream(line);
  }

  double keyed(const char* key) {
    auto fields = next();
    std::string name;
    std::string value;
    fields >> name >> value;
    if (name != key) {
      throw ParseError(std::string("expected key '") + key + "', got '" + name + "'", line_);
    }
    return parse_double(value, line_);
  }

  Eigen::VectorXd values(Eigen::Index count, const char* key) {
    auto fields = next();
    if (key != nullptr) {
      std::string name;
      fields >> name;
      if (name != key) {
        throw ParseError(std::string("expected key '") + key + "'", line_);
      }
    }
    Eigen::VectorXd out(count);
    std::string token;
    for (Eigen::Index i = 0; i < count; ++i) {
      if (!(fields >> token)) {
        throw ParseError("too few values", line_);
      }
      out[i] = parse_double(token, line_);
    }
    if (fields >> token) {
      throw ParseError("too many values", line_);
    }
    return out;
  }

  std::size_t line() const noexcept { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

}  // namespace

void save_checkpoint(std::ostream& out, const SnnCheckpoint& c) {
  out << kMagic << ' ' << SnnCheckpoint::kFormatVersion << '\n';
  out << "n_in " << c.topology.n_in << '\n';
  out << "n_out " << c.topology.n_out << '\n';
  out << "tau_membrane " << format_double(c.lif.tau_membrane) << '\n';
  out << "tau_input " << format_double(c.lif.tau_input) << '\n';
  out << "tau_current " << format_double(c.lif.tau_current) << '\n';
  out << "v_rest " << format_double(c.lif.v_rest) << '\n';
  out << "v_thresh " << format_double(c.lif.v_thresh) << '\n';
  out << "v_reset " << format_double(c.lif.v_reset) << '\n';
  out << "snn_dt " << format_double(c.lif.dt) << '\n';
  out << "tau_decoder " << format_double(c.decoder.tau_dec) << '\n';
  out << "lms_rate " << format_double(c.decoder.lms_rate) << '\n';
  out << "weights\n";
  for (Eigen::Index j = 0; j < c.topology.W.rows(); ++j) {
    write_row(out, c.topology.W.row(j).transpose());
  }
  out << "decoder_gain ";
  write_row(out, c.decoder.gain);
  out << "decoder_bias ";
  write_row(out, c.decoder.bias);
}

SnnCheckpoint load_checkpoint(std::istream& in) {
  LineReader reader(in);
  {
    auto header = reader.next();
    std::string magic;
    int version = 0;
    header >> magic >> version;
    if (magic != kMagic) {
      throw ParseError("not a spikekal checkpoint", reader.line());
    }
    if (version != SnnCheckpoint::kFormatVersion) {
      throw ParseError("unsupported checkpoint version " + std::to_string(version), reader.line());
    }
  }
  SnnCheckpoint c;
  const double n_in = reader.keyed("n_in");
  const double n_out = reader.keyed("n_out");
  if (n_in < 1 || n_out < 1 || n_in != static_cast<Eigen::Index>(n_in) ||
      n_out != static_cast<Eigen::Index>(n_out)) {
    throw ParseError("invalid layer sizes", reader.line());
  }
  c.topology.n_in = static_cast<Eigen::Index>(n_in);
  c.topology.n_out = static_cast<Eigen::Index>(n_out);
  c.lif.tau_membrane = reader.keyed("tau_membrane");
  c.lif.tau_input = reader.keyed("tau_input");
  c.lif.tau_current = reader.keyed("tau_current");
  c.lif.v_rest = reader.keyed("v_rest");
  c.lif.v_thresh = reader.keyed("v_thresh");
  c.lif.v_reset = reader.keyed("v_reset");
  c.lif.dt = reader.keyed("snn_dt");
  const double tau_dec = reader.keyed("tau_decoder");
  const double lms_rate = reader.keyed("lms_rate");
  {
    auto marker = reader.next();
    std::string word;
    marker >> word;
    if (word != "weights") {
      throw ParseError("expected 'weights'", reader.line());
    }
  }
  c.topology.W.resize(c.topology.n_out, c.topology.n_in);
  for (Eigen::Index j = 0; j < c.topology.n_out; ++j) {
    c.topology.W.row(j) = reader.values(c.topology.n_in, nullptr).transpose();
  }
  c.decoder = GainDecoder::create(c.topology.n_out, tau_dec, lms_rate);
  c.decoder.gain = reader.values(c.topology.n_out, "decoder_gain");
  c.decoder.bias = reader.values(c.topology.n_out, "decoder_bias");
  return c;
}

}  // namespace spikekal
