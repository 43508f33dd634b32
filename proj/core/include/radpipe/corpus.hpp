#pragma once

#include <string>
#include <vector>

#include "radpipe/tagging.hpp"

namespace radpipe {

/// One report of the annotated corpus. report_id is empty and label -1
/// when the file carries bare sentences without -DOC- markers.
struct CorpusReport {
  std::string report_id;
  int label = -1;
  std::vector<AnnotatedSentence> sentences;
};

/// Corpus file: one character and its tag per line, TAB-separated; a
/// blank line ends a sentence; `-DOC- <report_id> <label>` starts a report.
std::vector<CorpusReport> load_corpus(const std::string& path);
void save_corpus(const std::string& path, const std::vector<CorpusReport>& reports);

std::vector<AnnotatedSentence> corpus_sentences(const std::vector<CorpusReport>& reports);

}  // namespace radpipe
