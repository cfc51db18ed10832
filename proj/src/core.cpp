#include "core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace coatline {

void Geometry::validate() const {
  if (n_inlets < 1) throw ValidationError("geometry: n_inlets must be >= 1");
  if (stripe_centers.size() != n_inlets)
    throw ValidationError("geometry: stripe_centers length differs from n_inlets");
  if (!(web_speed > 0.0)) throw ValidationError("geometry: web speed U0 must be positive");
  if (!(sensor_station > 0.0)) throw ValidationError("geometry: sensor station x_s must be positive");
  if (!(sensor_radius > 0.0)) throw ValidationError("geometry: sensor radius r_c must be positive");
  if (!(stripe_width > 0.0)) throw ValidationError("geometry: stripe width w_s must be positive");
  if (!(channel_height > 0.0)) throw ValidationError("geometry: channel height h_ch must be positive");
  if (!(coating_width > 0.0)) throw ValidationError("geometry: coating width w must be positive");
  if (!(sensor_radius < 0.5 * stripe_width))
    throw ValidationError("geometry: sensor radius must be below half the stripe width");

  for (std::size_t i = 0; i < n_inlets; ++i) {
    const double lo = stripe_centers[i] - 0.5 * stripe_width;
    const double hi = stripe_centers[i] + 0.5 * stripe_width;
    if (lo < -1e-12 || hi > coating_width + 1e-12)
      throw ValidationError("geometry: stripe interval outside the coating width");
    if (i > 0) {
      const double prev_hi = stripe_centers[i - 1] + 0.5 * stripe_width;
      if (lo < prev_hi - 1e-12)
        throw ValidationError("geometry: stripe intervals overlap or are not ascending");
    }
  }
}

Geometry default_geometry() {
  Geometry g;
  g.n_inlets = 5;
  g.stripe_centers = {0.015, 0.045, 0.075, 0.105, 0.135};
  g.stripe_width = 0.030;
  g.channel_height = 0.004;
  g.sensor_station = 0.030;
  g.sensor_radius = 0.001;
  g.coating_width = 0.150;
  g.web_speed = 0.333;
  g.validate();
  return g;
}

void OperatingPoint::validate(std::size_t n_inlets) const {
  if (q0.size() != n_inlets || h0.size() != n_inlets)
    throw ValidationError("operating point: q0/h0 lengths differ from n_inlets");
  for (double v : q0)
    if (!(v > 0.0)) throw ValidationError("operating point: q0 must be strictly positive");
  for (double v : h0)
    if (!(v > 0.0)) throw ValidationError("operating point: h0 must be strictly positive");
}

void SignalLog::validate() const {
  if (inputs.rows() != outputs.rows())
    throw ValidationError("signal log: input and output channel counts differ");
  if (inputs.cols() != outputs.cols())
    throw ValidationError("signal log: input and output sample counts differ");
  if (!(sample_time > 0.0)) throw ValidationError("signal log: sample time must be positive");
}

namespace {

SignalLog shift_frame(const SignalLog &log, const OperatingPoint &op, double sign, Frame target) {
  log.validate();
  const std::size_t n = log.channels();
  op.validate(n);
  SignalLog out = log;
  out.frame = target;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < log.samples(); ++k) {
      out.inputs(i, k) += sign * op.q0[i];
      out.outputs(i, k) += sign * op.h0[i];
    }
  return out;
}

} // namespace

SignalLog to_deviation(const SignalLog &log, const OperatingPoint &op) {
  if (log.frame != Frame::absolute)
    throw ValidationError("to_deviation: log is already in the deviation frame");
  return shift_frame(log, op, -1.0, Frame::deviation);
}

SignalLog to_absolute(const SignalLog &log, const OperatingPoint &op) {
  if (log.frame != Frame::deviation)
    throw ValidationError("to_absolute: log is already in the absolute frame");
  return shift_frame(log, op, +1.0, Frame::absolute);
}

namespace {

void append_double(std::string &out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

double parse_double(const std::string &field, std::size_t line_no) {
  double v = 0.0;
  const char *first = field.data();
  const char *last = field.data() + field.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    std::ostringstream msg;
    msg << "signal log CSV: malformed number '" << field << "' on line " << line_no;
    throw IoError(msg.str());
  }
  return v;
}

} // namespace

void write_signal_log_csv(const SignalLog &log, const std::string &path) {
  log.validate();
  const std::size_t n = log.channels();
  std::string text = "t";
  for (std::size_t i = 1; i <= n; ++i) text += ",q" + std::to_string(i);
  for (std::size_t j = 1; j <= n; ++j) text += ",h" + std::to_string(j);
  text += "\n";
  for (std::size_t k = 0; k < log.samples(); ++k) {
    append_double(text, static_cast<double>(k) * log.sample_time);
    for (std::size_t i = 0; i < n; ++i) {
      text += ',';
      append_double(text, log.inputs(i, k));
    }
    for (std::size_t j = 0; j < n; ++j) {
      text += ',';
      append_double(text, log.outputs(j, k));
    }
    text += '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << text;
  if (!f) throw IoError("write failed: " + path);
}

SignalLog read_signal_log_csv(const std::string &path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open for reading: " + path);

  std::string line;
  if (!std::getline(f, line)) throw IoError("signal log CSV: empty file: " + path);
  std::size_t line_no = 1;

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) header.push_back(field);
  }
  if (header.size() < 3 || header[0] != "t" || header.size() % 2 == 0)
    throw IoError("signal log CSV: bad header on line 1 (expect t,q1..qn,h1..hn)");
  const std::size_t n = (header.size() - 1) / 2;
  for (std::size_t i = 0; i < n; ++i) {
    if (header[1 + i] != "q" + std::to_string(i + 1) ||
        header[1 + n + i] != "h" + std::to_string(i + 1))
      throw IoError("signal log CSV: bad header on line 1 (expect t,q1..qn,h1..hn)");
  }

  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<double> vals;
    while (std::getline(ss, field, ',')) vals.push_back(parse_double(field, line_no));
    if (vals.size() != 2 * n + 1) {
      std::ostringstream msg;
      msg << "signal log CSV: expected " << (2 * n + 1) << " fields, got " << vals.size()
          << " on line " << line_no;
      throw IoError(msg.str());
    }
    times.push_back(vals[0]);
    vals.erase(vals.begin());
    rows.push_back(std::move(vals));
  }
  if (rows.size() < 2) throw IoError("signal log CSV: need at least two samples: " + path);

  const double ts = times[1] - times[0];
  if (!(ts > 0.0)) throw IoError("signal log CSV: non-increasing time column");
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double step = times[k] - times[k - 1];
    if (std::abs(step - ts) > 1e-9 * std::max(1.0, std::abs(ts))) {
      std::ostringstream msg;
      msg << "signal log CSV: non-uniform time step on line " << (k + 2);
      throw IoError(msg.str());
    }
  }

  SignalLog log;
  log.sample_time = ts;
  log.frame = Frame::absolute;
  log.inputs = Matrix(n, rows.size());
  log.outputs = Matrix(n, rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t i = 0; i < n; ++i) {
      log.inputs(i, k) = rows[k][i];
      log.outputs(i, k) = rows[k][n + i];
    }
  return log;
}

} // namespace coatline
