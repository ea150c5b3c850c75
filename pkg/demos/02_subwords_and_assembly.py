"""Subword vocabulary learning, tokenization, and cross-document assembly.

Run:  python3 demos/02_subwords_and_assembly.py
"""

from oncoabstract import textproc as tp
from oncoabstract.corpus import GeneratorConfig, generate_corpus

bundle = generate_corpus(GeneratorConfig(n_cancer_patients=30, n_control_patients=10, seed=3))
texts = [tp.normalize(d.text).text for p in bundle.patients for d in p.documents]

vocab = tp.learn_vocab(texts, target_size=500)
print(f"learned {len(vocab)} units ({len(vocab.merges)} merges) from {len(texts)} documents")
print("first merges:", vocab.merges[:8])
print()

sample = "Invasive  Ductal\nCarcinoma of the LEFT breast"
norm = tp.normalize(sample)
print(f"normalize({sample!r})\n  -> {norm.text!r}")
tokens = tp.tokenize(vocab, norm.text)
print("tokens:", [vocab.unit(t.id) for t in tokens])
print("decode round-trip ok:", tp.decode(vocab, tokens) == norm.text)
print()

patient = bundle.cancer_patients[0]
seq = tp.assemble_input(patient, window=(30, 30), anchor_day=patient.registry.diagnosis_date,
                        kinds={"Pathology", "Radiology", "Operative"}, vocab=vocab)
print(f"assembled {patient.patient_id}: {len(seq.ids)} tokens, "
      f"{seq.n_sentences} sentences, window days {seq.window}")
seg = seq.sentences[0]
doc = next(d for d in patient.documents if d.doc_id == seg.doc_id)
print(f"first sentence ({seg.doc_id}#{seg.sentence_index}): "
      f"{doc.text[seg.char_start:seg.char_end]!r}")
tok_id = int(seq.ids[seg.token_start])
prov = seq.provenance[seg.token_start]
print(f"its first token {vocab.unit(tok_id)!r} maps to source chars "
      f"{prov[1]}:{prov[2]} = {doc.text[prov[1]:prov[2]]!r}")
