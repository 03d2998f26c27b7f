#include <gtest/gtest.h>

#include <sstream>

#include "qrx/report.hpp"

using namespace qrx;

TEST(Report, ScientificFormat)
{
  EXPECT_EQ(format_sci(9.157819444367090e-3), "9.157819444367e-03");
  EXPECT_EQ(format_sci(0.5), "5.000000000000e-01");
  EXPECT_EQ(format_sci(std::optional<double>{}), "");
}

TEST(Report, ManifestLinesAreComments)
{
  RunManifest m{"sql", {{"nbar", "2"}, {"sigma", "0"}}, tool_version, "2026-01-01T00:00:00Z"};
  std::ostringstream os;
  m.write(os);
  std::istringstream in(os.str());
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(line.front(), '#');
    ++n;
  }
  EXPECT_EQ(n, 5);
  EXPECT_NE(os.str().find("# parameter: nbar = 2"), std::string::npos);
}

TEST(Report, CsvQuoting)
{
  std::ostringstream os;
  write_csv_row(os, {"a", "b,c", "say \"hi\"", ""});
  EXPECT_EQ(os.str(), "a,\"b,c\",\"say \"\"hi\"\"\",\n");
}
