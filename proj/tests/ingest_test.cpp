#include "prockit/ingest.hpp"

#include <gtest/gtest.h>

#include <random>

#include "prockit/textindex.hpp"

using namespace prockit;
namespace fs = std::filesystem;

namespace {

const fs::path kData = PROCKIT_TEST_DATA;

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("prockit_ingest_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

}  // namespace

TEST(Ingest, MixedDirectory) {
  TempDir d;
  fs::create_directories(d.path / "html");
  fs::copy_file(kData / "make-a-youtube-video.html", d.path / "html" / "a.html");
  fs::copy_file(kData / "first_aid.jsonl", d.path / "b.jsonl");
  persist::write_file(d.path / "c.json",
                      R"({"title": "Prevent Viruses", "steps": ["Wash hands.", "Sleep early."]})");
  persist::write_file(d.path / "notes.txt", "ignored");

  IngestReport rep;
  const Corpus c = ingest({d.path}, {}, &rep);
  EXPECT_EQ(rep.files, 3u);
  EXPECT_EQ(rep.articles, c.size());
  EXPECT_TRUE(rep.rejected.empty());
  EXPECT_EQ(c.size(), 1u + 11u + 1u);
  ASSERT_NE(c.find("prevent-viruses"), nullptr);
  EXPECT_EQ(c.find("prevent-viruses")->step_count(), 2u);
  EXPECT_NE(c.find("make-a-youtube-video"), nullptr);

  // same bytes whatever order the inputs are named in
  const Corpus again = ingest({d.path / "c.json", d.path / "b.jsonl", d.path / "html"});
  ASSERT_EQ(again.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    EXPECT_EQ(serialize_article(again.articles()[i]), serialize_article(c.articles()[i]));
}

TEST(Ingest, ErrorsCarryPathAndLine) {
  TempDir d;
  persist::write_file(d.path / "a.jsonl",
                      "{\"title\": \"Fold a Shirt\", \"steps\": [\"Lay it flat.\"]}\n"
                      "{\"title\": \"\", \"steps\": []}\n"
                      "{\"title\": \"Fold a Shirt\", \"steps\": [\"Fold it.\"]}\n"
                      "not json\n");
  try {
    ingest({d.path});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("a.jsonl"), std::string::npos);
  }

  IngestReport rep;
  const Corpus c = ingest({d.path}, {IngestFormat::kAuto, true}, &rep);
  EXPECT_EQ(c.size(), 1u);
  ASSERT_EQ(rep.rejected.size(), 3u);
  EXPECT_EQ(rep.rejected[0].line, 2u);
  EXPECT_EQ(rep.rejected[1].line, 3u);
  EXPECT_EQ(rep.rejected[1].code, ErrorCode::kDuplicateId);
  EXPECT_EQ(rep.rejected[2].code, ErrorCode::kMalformedMarkup);
  const auto text = ingest_report_text(rep);
  EXPECT_NE(text.find("rejected\t3"), std::string::npos);
  EXPECT_NE(text.find("a.jsonl:3\tduplicate_id"), std::string::npos);

  try {
    ingest({d.path / "missing"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}
