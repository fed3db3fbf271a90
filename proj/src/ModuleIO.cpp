//===- ModuleIO.cpp - Text format for modules -----------------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "inlinesim/ModuleIO.h"
#include "inlinesim/Error.h"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <charconv>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace inlinesim;

std::string inlinesim::printModule(const ModuleDesc &M) {
  std::string Out;
  auto Line = [&Out](std::string_view Key, std::string_view Value) {
    Out += Key;
    Out += ' ';
    Out += Value;
    Out += '\n';
  };
  Line("format_version", std::to_string(ModuleFormatVersion));
  Line("module", M.Name);
  Line("growth_cap_factor", M.GrowthCap.str());
  for (const FunctionDesc &F : M.Functions) {
    Line("function", F.Id);
    Line("  linkage", F.Link == Linkage::Internal ? "internal" : "external");
    Line("  size", std::to_string(F.Size));
    Line("  basic_block_count", std::to_string(F.BasicBlocks));
    Line("  conditional_block_count", std::to_string(F.ConditionalBlocks));
    Line("  param_count", std::to_string(F.ParamCount));
    Out += "  param_savings";
    for (std::int64_t S : F.ParamSavings)
      Out += ' ' + std::to_string(S);
    Out += '\n';
    for (const CallSiteDesc &C : F.CallSites) {
      std::string Mask;
      for (bool B : C.ConstArgs)
        Mask += B ? '1' : '0';
      if (Mask.empty())
        Mask = "-";
      Line("  call_site", fmt::format("{} callee={} const_args={}", C.Id,
                                      C.Callee, Mask));
    }
    Out += "end_function\n";
  }
  return Out;
}

namespace {

class LineReader {
public:
  explicit LineReader(std::string_view Text) : Text(Text) {}

  bool atEnd() const { return Pos >= Text.size(); }
  unsigned lineNo() const { return LineNo; }

  std::string_view next() {
    ++LineNo;
    if (atEnd())
      fail("unexpected end of document");
    auto Nl = Text.find('\n', Pos);
    if (Nl == std::string_view::npos)
      fail("missing trailing newline");
    std::string_view L = Text.substr(Pos, Nl - Pos);
    Pos = Nl + 1;
    return L;
  }

  /// Reads "<Key> <value>" and returns the value.
  std::string_view expect(std::string_view Key) {
    std::string_view L = next();
    if (L.substr(0, Key.size()) != Key || L.size() <= Key.size() ||
        L[Key.size()] != ' ')
      fail("expected '" + std::string(Key) + " <value>'");
    return L.substr(Key.size() + 1);
  }

  std::int64_t integer(std::string_view V) const {
    std::int64_t Out = 0;
    auto [Ptr, Ec] = std::from_chars(V.data(), V.data() + V.size(), Out);
    // Canonical decimal only: no leading zeros, no '+', no "-0".
    bool Canonical = !V.empty() && (V == "0" || (V[0] != '0' && V != "-0" &&
                                                 V.substr(0, 2) != "-0"));
    if (Ec != std::errc() || Ptr != V.data() + V.size() || !Canonical)
      fail("malformed integer '" + std::string(V) + "'");
    return Out;
  }

  [[noreturn]] void fail(const std::string &Msg) const {
    throw Error(ErrorKind::Parse,
                fmt::format("line {}: {}", std::max(LineNo, 1u), Msg));
  }

private:
  std::string_view Text;
  std::size_t Pos = 0;
  unsigned LineNo = 0;
};

} // namespace

ModuleDesc inlinesim::parseModule(std::string_view Text) {
  LineReader R(Text);
  if (R.integer(R.expect("format_version")) != ModuleFormatVersion)
    R.fail("unsupported format_version");
  ModuleDesc M;
  M.Name = std::string(R.expect("module"));
  std::string_view Cap = R.expect("growth_cap_factor");
  try {
    M.GrowthCap = Ratio::parse(Cap);
  } catch (const Error &E) {
    R.fail(E.what());
  }
  if (M.GrowthCap.str() != Cap)
    R.fail("growth_cap_factor is not in canonical form");

  while (!R.atEnd()) {
    FunctionDesc F;
    F.Id = std::string(R.expect("function"));
    std::string_view Link = R.expect("  linkage");
    if (Link == "internal")
      F.Link = Linkage::Internal;
    else if (Link == "external")
      F.Link = Linkage::External;
    else
      R.fail("linkage must be internal or external");
    F.Size = R.integer(R.expect("  size"));
    F.BasicBlocks = R.integer(R.expect("  basic_block_count"));
    F.ConditionalBlocks = R.integer(R.expect("  conditional_block_count"));
    F.ParamCount = R.integer(R.expect("  param_count"));

    std::string_view Savings = R.next();
    constexpr std::string_view SavingsKey = "  param_savings";
    if (Savings.substr(0, SavingsKey.size()) != SavingsKey)
      R.fail("expected '  param_savings'");
    Savings.remove_prefix(SavingsKey.size());
    while (!Savings.empty()) {
      if (Savings[0] != ' ')
        R.fail("malformed param_savings");
      Savings.remove_prefix(1);
      auto End = Savings.find(' ');
      F.ParamSavings.push_back(R.integer(Savings.substr(0, End)));
      Savings = End == std::string_view::npos ? std::string_view()
                                              : Savings.substr(End);
    }

    for (;;) {
      std::string_view L = R.next();
      if (L == "end_function")
        break;
      constexpr std::string_view SiteKey = "  call_site ";
      if (L.substr(0, SiteKey.size()) != SiteKey)
        R.fail("expected '  call_site' or 'end_function'");
      L.remove_prefix(SiteKey.size());
      auto Sp1 = L.find(' ');
      auto Sp2 = Sp1 == std::string_view::npos ? Sp1 : L.find(' ', Sp1 + 1);
      if (Sp2 == std::string_view::npos ||
          L.find(' ', Sp2 + 1) != std::string_view::npos)
        R.fail("call_site needs '<id> callee=<f> const_args=<mask>'");
      std::string_view Callee = L.substr(Sp1 + 1, Sp2 - Sp1 - 1);
      std::string_view Mask = L.substr(Sp2 + 1);
      if (Callee.substr(0, 7) != "callee=" || Mask.substr(0, 11) != "const_args=")
        R.fail("call_site needs '<id> callee=<f> const_args=<mask>'");
      CallSiteDesc C;
      C.Id = std::string(L.substr(0, Sp1));
      C.Callee = std::string(Callee.substr(7));
      Mask.remove_prefix(11);
      if (Mask != "-") {
        if (Mask.empty())
          R.fail("empty const_args mask must be written as '-'");
        for (char Ch : Mask) {
          if (Ch != '0' && Ch != '1')
            R.fail("const_args must be a 0/1 string");
          C.ConstArgs.push_back(Ch == '1');
        }
      }
      F.CallSites.push_back(std::move(C));
    }
    M.Functions.push_back(std::move(F));
  }
  return M;
}

std::string inlinesim::readFile(const std::filesystem::path &Path) {
  std::ifstream In(Path, std::ios::binary);
  if (!In)
    throw Error(ErrorKind::Data, "cannot open '" + Path.string() + "'");
  std::ostringstream S;
  S << In.rdbuf();
  return S.str();
}

ModuleDesc inlinesim::readModuleFile(const std::filesystem::path &Path) {
  ModuleDesc M;
  try {
    M = parseModule(readFile(Path));
  } catch (const Error &E) {
    throw Error(E.kind(), Path.string() + ": " + E.what());
  }
  if (auto Problems = validate(M); !Problems.empty())
    throw Error(ErrorKind::Load,
                fmt::format("{}: {}", Path.string(), fmt::join(Problems, "; ")));
  return M;
}

void inlinesim::writeFileAtomic(const std::filesystem::path &Path,
                                std::string_view Contents) {
  auto Tmp = Path;
  Tmp += fmt::format(".tmp.{}", ::getpid());
  {
    std::ofstream Out(Tmp, std::ios::binary | std::ios::trunc);
    if (!Out)
      throw Error(ErrorKind::Data, "cannot write '" + Tmp.string() + "'");
    Out.write(Contents.data(), static_cast<std::streamsize>(Contents.size()));
    if (!Out.flush())
      throw Error(ErrorKind::Data, "short write to '" + Tmp.string() + "'");
  }
  std::error_code Ec;
  std::filesystem::rename(Tmp, Path, Ec);
  if (Ec) {
    std::filesystem::remove(Tmp, Ec);
    throw Error(ErrorKind::Data, "cannot rename onto '" + Path.string() + "'");
  }
}
