// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "phmor/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <nlohmann/json.hpp>
#include "phmor/error.hpp"

namespace phmor
{

namespace
{

using nlohmann::json;

json FlatRowMajor(const Matrix &A)
{
  json arr = json::array();
  for (Index i = 0; i < A.rows(); ++i)
  {
    for (Index j = 0; j < A.cols(); ++j)
    {
      if (!std::isfinite(A(i, j)))
      {
        throw Error(ErrorKind::NonFinite, "cannot serialize a non-finite entry");
      }
      arr.push_back(A(i, j));
    }
  }
  return arr;
}

Matrix ReadMatrix(const json &doc, const char *key, Index rows, Index cols, bool optional)
{
  if (!doc.contains(key))
  {
    if (optional)
    {
      return Matrix::Zero(rows, cols);
    }
    throw Error(ErrorKind::Config, std::string("system document lacks field ") + key);
  }
  const json &arr = doc.at(key);
  if (!arr.is_array() || Index(arr.size()) != rows * cols)
  {
    std::ostringstream msg;
    msg << "field " << key << " must be an array of " << rows * cols << " numbers";
    throw Error(ErrorKind::DimensionMismatch, msg.str());
  }
  Matrix A(rows, cols);
  for (Index i = 0; i < rows; ++i)
  {
    for (Index j = 0; j < cols; ++j)
    {
      const json &v = arr[std::size_t(i * cols + j)];
      if (!v.is_number())
      {
        throw Error(ErrorKind::Config, std::string("field ") + key + " has a non-numeric entry");
      }
      A(i, j) = v.get<double>();
    }
  }
  return A;
}

}  // namespace

std::string SerializeSystem(const PhdaeSystem &sys)
{
  sys.CheckDimensions();
  json doc;
  doc["n"] = sys.n();
  doc["m"] = sys.m();
  doc["E"] = FlatRowMajor(sys.E);
  doc["J"] = FlatRowMajor(sys.J);
  doc["R"] = FlatRowMajor(sys.R);
  doc["Q"] = FlatRowMajor(sys.Q);
  doc["B"] = FlatRowMajor(sys.B);
  doc["P"] = FlatRowMajor(sys.P);
  doc["S"] = FlatRowMajor(sys.S);
  doc["N"] = FlatRowMajor(sys.N);
  return doc.dump(1) + "\n";
}

PhdaeSystem ParseSystem(const std::string &text)
{
  json doc;
  try
  {
    doc = json::parse(text);
  }
  catch (const json::exception &e)
  {
    throw Error(ErrorKind::Config, std::string("malformed system document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("n") || !doc.contains("m") ||
      !doc.at("n").is_number_integer() || !doc.at("m").is_number_integer())
  {
    throw Error(ErrorKind::Config, "system document needs integer fields n and m");
  }
  const Index n = doc.at("n").get<Index>(), m = doc.at("m").get<Index>();
  if (n < 0 || m < 0)
  {
    throw Error(ErrorKind::Config, "system dimensions must be nonnegative");
  }
  PhdaeSystem sys;
  sys.E = ReadMatrix(doc, "E", n, n, false);
  sys.J = ReadMatrix(doc, "J", n, n, false);
  sys.R = ReadMatrix(doc, "R", n, n, false);
  sys.Q = ReadMatrix(doc, "Q", n, n, false);
  sys.B = ReadMatrix(doc, "B", n, m, false);
  sys.P = ReadMatrix(doc, "P", n, m, true);
  sys.S = ReadMatrix(doc, "S", m, m, true);
  sys.N = ReadMatrix(doc, "N", m, m, true);
  return sys;
}

std::string ReadText(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw Error(ErrorKind::Io, "cannot open " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteTextAtomic(const std::string &path, const std::string &text)
{
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path())
  {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
    {
      throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    }
    out << text;
    if (!out)
    {
      throw Error(ErrorKind::Io, "write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec)
  {
    throw Error(ErrorKind::Io, "cannot rename onto " + path + ": " + ec.message());
  }
}

PhdaeSystem ReadSystem(const std::string &path) { return ParseSystem(ReadText(path)); }

void WriteSystem(const std::string &path, const PhdaeSystem &sys)
{
  WriteTextAtomic(path, SerializeSystem(sys));
}

std::string FormatDouble(double x)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string FormatErrorCurve(const ErrorCurve &curve)
{
  std::string out = "omega,norm_G,norm_err,rel_err\n";
  for (std::size_t k = 0; k < curve.omega.size(); ++k)
  {
    out += FormatDouble(curve.omega[k]);
    out += ',';
    out += FormatDouble(curve.norm_G[k]);
    out += ',';
    out += FormatDouble(curve.norm_err[k]);
    out += ',';
    out += FormatDouble(curve.rel_err[k]);
    out += '\n';
  }
  return out;
}

}  // namespace phmor
