#include <stdio.h>
#include <string.h>

#include "prockit/prockit.h"

int main(int argc, char** argv) {
  pk_corpus* corpus = NULL;
  char* json = NULL;
  if (argc != 2) return 2;
  if (pk_corpus_load(argv[1], &corpus) != PK_OK) {
    fprintf(stderr, "%s\n", pk_last_error());
    return 1;
  }
  if (pk_corpus_size(corpus) == 0) return 1;
  if (pk_corpus_article(corpus, "no-such-article", &json) != PK_ERR_NOT_FOUND) return 1;
  if (strcmp(pk_status_name(PK_ERR_NOT_FOUND), "not_found") != 0) return 1;
  if (pk_corpus_article(corpus, "make-a-movie", &json) != PK_OK) return 1;
  printf("%zu %s\n", pk_corpus_size(corpus), json);
  pk_free(json);
  pk_corpus_free(corpus);
  return 0;
}
