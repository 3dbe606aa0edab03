#!/usr/bin/env python3
"""Writes the synthetic cases and scripted-backend files under tests/fixtures."""

import json
import math
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

CLINICIAN = "Independent Clinician"

# Each case: presentation, DDx, truth, the two evidence excerpts (verbatim
# substrings), and a discussion plan {round: {role: label index}}.
CASES = [
    {
        "id": "c01",
        "specialty": "cardiology",
        "presentation": (
            "A 62-year-old man presents with crushing substernal chest pain radiating to the left arm that began "
            "forty minutes ago while shoveling snow. He is diaphoretic and nauseated. He has a history of "
            "hypertension, type 2 diabetes and a thirty pack-year smoking history. Blood pressure is 150/92 mmHg "
            "and heart rate 98 beats per minute. The electrocardiogram shows ST elevation in leads II, III and aVF. "
            "Troponin I is elevated at 4.1 ng/mL. Chest radiograph shows clear lung fields."
        ),
        "ddx": ["Inferior ST-elevation myocardial infarction", "Aortic dissection", "Acute pericarditis"],
        "truth": "Inferior ST-elevation myocardial infarction",
        "excerpts": ["ST elevation in leads II, III and aVF", "radiating to the left arm"],
        "specialists": ["Cardiologist"],
        "plan": {0: {"Cardiologist": 0, CLINICIAN: 0}},
    },
    {
        "id": "c02",
        "specialty": "gastroenterology",
        "presentation": (
            "A 45-year-old woman reports three days of epigastric pain radiating to the back, worse after a fatty "
            "meal, with repeated vomiting. She drinks alcohol only occasionally. Temperature is 37.9 C, heart rate "
            "110 beats per minute. There is epigastric tenderness without rebound. Serum lipase is 1450 U/L. "
            "Alanine aminotransferase is 310 U/L and total bilirubin 2.4 mg/dL. Ultrasound shows multiple "
            "gallstones and a common bile duct of 8 mm."
        ),
        "ddx": ["Acute gallstone pancreatitis", "Acute cholecystitis", "Perforated peptic ulcer"],
        "truth": "Acute cholecystitis",
        "excerpts": ["Serum lipase is 1450 U/L", "multiple gallstones"],
        "specialists": ["Gastroenterologist", "General Surgeon"],
        "plan": {0: {"Gastroenterologist": 0, "General Surgeon": 0, CLINICIAN: 0}},
    },
    {
        "id": "c03",
        "specialty": "pulmonology",
        "presentation": (
            "A 34-year-old woman presents with sudden pleuritic chest pain and shortness of breath two weeks after "
            "a long-haul flight. She takes an oral contraceptive. Heart rate is 118 beats per minute, respiratory "
            "rate 24 and oxygen saturation 90 percent on room air. The right calf is swollen and tender. D-dimer "
            "is 3.2 mg/L. The electrocardiogram shows sinus tachycardia. Chest radiograph is unremarkable apart "
            "from a small right pleural effusion."
        ),
        "ddx": ["Acute pulmonary embolism", "Community-acquired pneumonia", "Spontaneous pneumothorax"],
        "truth": "Acute pulmonary embolism",
        "excerpts": ["The right calf is swollen and tender", "small right pleural effusion"],
        "specialists": ["Pulmonologist", "Cardiologist"],
        "plan": {
            0: {"Pulmonologist": 0, "Cardiologist": 1, CLINICIAN: 0},
            1: {"Pulmonologist": 0, "Cardiologist": 0, CLINICIAN: 0},
        },
        "routed": True,
    },
    {
        "id": "c04",
        "specialty": "neurology",
        "presentation": (
            "A 71-year-old man is brought in with sudden weakness of the right arm and face and difficulty finding "
            "words that began ninety minutes ago. He has atrial fibrillation and stopped his anticoagulant last "
            "month. Blood pressure is 178/96 mmHg. Glucose is 6.1 mmol/L. Examination shows right facial droop "
            "and right arm drift with expressive aphasia. Non-contrast head computed tomography shows no "
            "hemorrhage. He had a similar ten-minute episode last week that resolved completely."
        ),
        "ddx": ["Acute ischemic stroke", "Intracerebral hemorrhage", "Todd paralysis after seizure"],
        "truth": "Acute ischemic stroke",
        "excerpts": ["stopped his anticoagulant last month", "right arm drift with expressive aphasia"],
        "specialists": ["Neurologist"],
        "plan": {r: {"Neurologist": 0, CLINICIAN: 2} for r in range(3)},
        "deadlock": True,
        "judge_pick": 0,
    },
    {
        "id": "c05",
        "specialty": "endocrinology",
        "presentation": (
            "A 19-year-old man with type 1 diabetes presents with two days of vomiting, abdominal pain and "
            "deep rapid breathing after missing insulin doses. Heart rate is 122 beats per minute and blood "
            "pressure 98/60 mmHg. Capillary glucose is 28 mmol/L. Venous pH is 7.12 with bicarbonate 9 mmol/L "
            "and an anion gap of 26. Serum beta-hydroxybutyrate is 6.0 mmol/L. Serum osmolality is 302 mOsm/kg. "
            "He is alert and oriented."
        ),
        "ddx": ["Diabetic ketoacidosis", "Hyperosmolar hyperglycemic state", "Acute gastroenteritis"],
        "truth": "Diabetic ketoacidosis",
        "excerpts": ["Serum beta-hydroxybutyrate is 6.0 mmol/L", "Capillary glucose is 28 mmol/L"],
        "specialists": ["Endocrinologist"],
        "plan": {0: {"Endocrinologist": 1, CLINICIAN: 0}, 1: {"Endocrinologist": 0, CLINICIAN: 0}},
        "stance_change": {"role": "Endocrinologist", "from": 1, "logprobs": [-0.2, -0.1]},
    },
    {
        "id": "c06",
        "specialty": "infectious disease",
        "presentation": (
            "A 27-year-old woman has fever, headache and neck stiffness for one day. She is drowsy but rousable. "
            "Temperature is 39.4 C. There is a non-blanching petechial rash over the legs. Kernig sign is "
            "positive. White cell count is 21 x 10^9/L. Lumbar puncture shows turbid fluid with 2300 neutrophils "
            "per microliter, protein 2.1 g/L and glucose 1.0 mmol/L. Gram stain shows gram-negative diplococci."
        ),
        "ddx": ["Meningococcal meningitis", "Viral meningitis", "Subarachnoid hemorrhage"],
        "truth": "Meningococcal meningitis",
        "excerpts": ["gram-negative diplococci", "non-blanching petechial rash"],
        "specialists": ["Infectious Disease Specialist"],
        "plan": {0: {"Infectious Disease Specialist": 0, CLINICIAN: 0}},
        "first_reply_unparseable": "Infectious Disease Specialist",
    },
    {
        "id": "c07",
        "specialty": "nephrology",
        "presentation": (
            "A 58-year-old man with heart failure was started on high-dose diuretics and an ACE inhibitor one "
            "week ago. He now reports dizziness and reduced urine output. Blood pressure is 92/58 mmHg with "
            "postural drop. Mucous membranes are dry. Serum creatinine has risen from 1.1 to 2.9 mg/dL and urea "
            "from 6 to 24 mmol/L. Fractional excretion of sodium is 0.4 percent. Urinalysis shows hyaline casts "
            "only. Renal ultrasound shows kidneys of normal size without hydronephrosis."
        ),
        "ddx": ["Prerenal acute kidney injury", "Acute tubular necrosis", "Obstructive uropathy"],
        "truth": "Prerenal acute kidney injury",
        "excerpts": ["Fractional excretion of sodium is 0.4 percent", "hyaline casts only"],
        "specialists": ["Nephrologist"],
        "plan": {0: {"Nephrologist": 0, CLINICIAN: 0}},
        "triage_unknown_role": "Kidney Wizard",
    },
    {
        "id": "c08",
        "specialty": "hematology",
        "presentation": (
            "A 66-year-old woman reports six months of fatigue, tingling in both feet and unsteady gait. She had "
            "a partial gastrectomy twelve years ago. Her tongue is smooth and red. Vibration sense is reduced in "
            "both ankles. Hemoglobin is 8.9 g/dL with a mean corpuscular volume of 112 fL. The blood film shows "
            "hypersegmented neutrophils. Serum folate is within the reference range. Lactate dehydrogenase is "
            "raised."
        ),
        "ddx": ["Vitamin B12 deficiency anemia", "Folate deficiency anemia", "Myelodysplastic syndrome"],
        "truth": "Vitamin B12 deficiency anemia",
        "excerpts": ["partial gastrectomy twelve years ago", "hypersegmented neutrophils"],
        "specialists": ["Hematologist", "Neurologist"],
        "plan": {r: {"Hematologist": 0, "Neurologist": 2, CLINICIAN: 1} for r in range(3)},
        "deadlock": True,
        "judge_pick": 0,
    },
    {
        "id": "c09",
        "specialty": "general surgery",
        "presentation": (
            "A 22-year-old man has abdominal pain that started around the umbilicus and moved to the right lower "
            "quadrant over eighteen hours, with anorexia and one episode of vomiting. Temperature is 38.1 C. "
            "There is tenderness at McBurney point with guarding and a positive Rovsing sign. White cell count is "
            "14.8 x 10^9/L with neutrophilia. Urinalysis is clear. Ultrasound shows a non-compressible tubular "
            "structure of 9 mm in the right iliac fossa."
        ),
        "ddx": ["Acute appendicitis", "Mesenteric adenitis", "Right ureteric colic"],
        "truth": "Acute appendicitis",
        "excerpts": ["non-compressible tubular structure of 9 mm", "positive Rovsing sign"],
        "specialists": ["General Surgeon"],
        "plan": {0: {"General Surgeon": 0, CLINICIAN: 0}},
        "clinician_synonym": "appendicitis, acute",
    },
    {
        "id": "c10",
        "specialty": "rheumatology",
        "presentation": (
            "A 52-year-old man wakes with a hot, swollen and exquisitely painful right first "
            "metatarsophalangeal joint after a weekend of heavy drinking. He takes a thiazide diuretic. "
            "Temperature is 37.6 C. The joint is red and cannot bear the weight of a bedsheet. Serum urate is "
            "9.8 mg/dL. Joint aspirate shows needle-shaped negatively birefringent crystals and a white cell count "
            "of 18000 per microliter with a negative Gram stain."
        ),
        "ddx": ["Acute gout", "Septic arthritis", "Pseudogout"],
        "truth": "Acute gout",
        "excerpts": ["negatively birefringent crystals", "takes a thiazide diuretic"],
        "specialists": ["Rheumatologist", "Orthopedic Surgeon", "Infectious Disease Specialist"],
        "plan": {0: {"Rheumatologist": 0, "Orthopedic Surgeon": 0, "Infectious Disease Specialist": 1, CLINICIAN: 0}},
    },
]

BASE_P = 0.8
NEGATE_P = 0.5


def entry(match, reply, **extra):
    out = {"match": match, "reply": reply}
    out.update(extra)
    return out


def specialist_reply(label, confidence="High", question="None", answer="None"):
    return (
        "<reasoning_chain>\nThe timeline and key findings point toward the leading candidate.\n</reasoning_chain>\n"
        "<discriminators>\nThe decisive findings separate the candidates.\n</discriminators>\n"
        "<counterfactual_evidence>\nRemoving the key finding lowers confidence in the leading label.\n"
        "</counterfactual_evidence>\n"
        "<critique>\nOther stances underweight the decisive finding.\n</critique>\n"
        f"<final_diagnosis>\n{label}\n</final_diagnosis>\n"
        f"<counterargument_question>\n{question}\n</counterargument_question>\n"
        f"<counterargument_answer>\n{answer}\n</counterargument_answer>\n"
        f"<confidence>\n{confidence}\n</confidence>"
    )


def case_entries(c):
    cid = c["id"]
    ddx = c["ddx"]
    out = []

    triage = {
        "main_symptoms": ["presenting complaint"],
        "problems": ["diagnostic uncertainty"],
        "assigned_specialists": [{"role": r, "rationale": "relevant to the presentation"} for r in c["specialists"]],
        "num_agents": len(c["specialists"]),
    }
    if "triage_unknown_role" in c:
        bad = dict(triage)
        bad["assigned_specialists"] = [{"role": c["triage_unknown_role"], "rationale": "invented"}]
        bad["num_agents"] = 1
        out.append(entry({"kind": "triage", "case_id": cid, "attempt": "0"}, json.dumps(bad, indent=2)))
        out.append(entry({"kind": "triage", "case_id": cid, "attempt": "2"}, json.dumps(triage, indent=2)))
    else:
        out.append(entry({"kind": "triage", "case_id": cid}, json.dumps(triage, indent=2)))

    ddx_doc = {
        "case_summary": f"Synthetic case {cid}.",
        "most_likely_diagnoses": [{"diagnosis": d, "rationale": f"fits the findings of {cid}"} for d in ddx],
    }
    out.append(entry({"kind": "ddx", "case_id": cid}, json.dumps(ddx_doc, indent=2)))
    out.append(entry({"kind": "report", "case_id": cid},
                     "<report>\n${role} review of the key findings.\n</report>"))

    # Evidence: the first and third candidates share the first excerpt.
    for i, d in enumerate(ddx):
        excerpt = c["excerpts"][1 if i == 1 else 0]
        out.append(entry({"kind": "evidence", "case_id": cid, "diagnosis": d},
                         f"<evidence>{excerpt}</evidence>\n<rationale>Supports {d}.</rationale>"))

    # Probes. Original case -> leading label; edited cases keyed by edit markers.
    base_lp = [math.log(BASE_P)]
    out.append(entry({"kind": "probe", "case_id": cid}, f"<think>Reasoning.</think>\n<answer>{ddx[0]}</answer>",
                     label_logprobs=base_lp))
    out.append(entry({"kind": "probe", "case_id": cid, "contains": "no " + c["excerpts"][0]},
                     f"<answer>{ddx[0]}</answer>", label_logprobs=[math.log(NEGATE_P)]))
    out.append(entry({"kind": "probe", "case_id": cid, "contains": "no " + c["excerpts"][1]},
                     f"<answer>{ddx[0]}</answer>", label_logprobs=[math.log(0.7)]))
    out.append(entry({"kind": "probe", "case_id": cid, "contains": "normal results"},
                     f"<answer>{ddx[1]}</answer>", label_logprobs=[math.log(0.6)]))
    out.append(entry({"kind": "probe", "case_id": cid, "contains": "severe "},
                     f"<answer>{ddx[0]}</answer>", label_logprobs=[math.log(0.9)]))
    out.append(entry({"kind": "probe", "case_id": cid, "contains": "Working diagnosis from the previous round"},
                     "<answer>${hypothesis}</answer>", label_logprobs=[-0.1]))
    if "stance_change" in c:
        sc = c["stance_change"]
        out.append(entry({"kind": "probe", "case_id": cid, "hypothesis": ddx[sc["from"]],
                          "contains": "Working diagnosis from the previous round"},
                         f"<answer>{ddx[sc['from']]}</answer>", label_logprobs=sc["logprobs"]))

    # Discussion turns.
    for rnd, stances in c["plan"].items():
        for role, idx in stances.items():
            kind = "clinician" if role == CLINICIAN else "specialist"
            label = ddx[idx]
            if role == CLINICIAN and "clinician_synonym" in c:
                label = c["clinician_synonym"]
            question = "None"
            answer = "None"
            if c.get("routed"):
                asker, target = c["specialists"][0], c["specialists"][1]
                if rnd == 0 and role == asker:
                    question = f"Q-TO-[{target}]: How do you explain the swollen calf if this is pneumonia?"
                if rnd == 1 and role == target:
                    answer = f"A-TO-[{asker}]: The calf finding favors embolism; I revise my stance."
            out.append(entry({"kind": kind, "case_id": cid, "role": role, "round": str(rnd)},
                             specialist_reply(label, question=question, answer=answer)))
            if c.get("first_reply_unparseable") == role and rnd == 0:
                out.append(entry({"kind": kind, "case_id": cid, "role": role, "round": "0", "attempt": "0"},
                                 "I think it is probably an infection but I will not commit yet."))

    if c.get("deadlock"):
        pick = ddx[c["judge_pick"]]
        verdict = {
            "had_consensus": False,
            "initial_symptom_reasoning": "The presenting pattern fits the chosen label.",
            "timeline_importance": "Onset and progression are consistent.",
            "primary_cause_vs_downstream": "The chosen label is the primary cause.",
            "counterfactual_evidence_summary": "Negating the key finding lowered support.",
            "final_diagnosis": pick,
            "winner_role": c["specialists"][0],
            "rationale": "Best supported by the decisive finding.",
            "confidence_score": "Moderate",
            "validation_check": "Consistent with the differential.",
        }
        out.append(entry({"kind": "judge", "case_id": cid}, json.dumps(verdict, indent=2)))

    if c.get("routed"):
        asker, target = c["specialists"][0], c["specialists"][1]
        out.append(entry(
            {"kind": "summarizer", "case_id": cid, "round": "0"},
            "<summary_log>\nRound 0: split between embolism and pneumonia.\n"
            f'<question from="{asker}" to="{target}" round="0">How do you explain the swollen calf?</question>\n'
            "</summary_log>"))
        out.append(entry(
            {"kind": "summarizer", "case_id": cid, "round": "1"},
            "<summary_log>\nRound 0: split between embolism and pneumonia.\n"
            f'<question from="{asker}" to="{target}" round="0">How do you explain the swollen calf?</question>\n'
            f'<answer from="{target}" to="{asker}" round="1">The calf finding favors embolism.</answer>\n'
            "Round 1: agreement on embolism.\n</summary_log>"))

    # Baselines and case summarization.
    out.append(entry({"kind": "baseline", "case_id": cid},
                     f"<think>\nThe findings point to {ddx[0]}.\n</think>\n\n<answer>\n{ddx[0]}\n</answer>"))
    sentences = c["presentation"].split(". ")
    summary = ". ".join(sentences[:2]).rstrip(".") + "."
    if cid == "c02":
        out.append(entry({"kind": "case_summary", "case_id": cid}, "Here is a summary without the tags."))
    else:
        out.append(entry({"kind": "case_summary", "case_id": cid}, f"<case_prompt>\n{summary}\n</case_prompt>"))
    return out


def generic_entries():
    return [
        entry({"kind": "edit", "op": "Negate"}, "<edited_span>no ${span}</edited_span>"),
        entry({"kind": "edit", "op": "Replace"}, "<edited_span>normal results</edited_span>"),
        entry({"kind": "edit", "op": "Weaken"}, "<edited_span>mild ${span}</edited_span>"),
        entry({"kind": "edit", "op": "Intensify"}, "<edited_span>severe ${span}</edited_span>"),
        entry({"kind": "edit", "op": "Insert"},
              "<inserted_finding>Vital signs were otherwise stable on repeat measurement</inserted_finding>"),
        entry({"kind": "summarizer"}, "<summary_log>\nRound ${round}: stances recorded.\n</summary_log>"),
    ]


def judge_script():
    return {
        "id": "scripted-judge",
        "capabilities": {"logprobs": False, "seed": False},
        "entries": [
            entry({"kind": "eval_judge"}, "No"),
            entry({"kind": "eval_judge", "equal_tags": ["prediction", "truth"]}, "Yes"),
            entry({"kind": "eval_judge", "prediction": "appendicitis, acute"}, "Yes"),
        ],
    }


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / "cases.jsonl", "w") as f:
        for c in CASES:
            rec = {"id": c["id"], "case_presentation": c["presentation"], "final_diagnosis": c["truth"],
                   "metadata": {"specialty": c["specialty"]}}
            f.write(json.dumps(rec) + "\n")

    entries = []
    for c in CASES:
        entries.extend(case_entries(c))
    entries.extend(generic_entries())
    script = {"id": "scripted-mock", "capabilities": {"logprobs": True, "seed": False}, "entries": entries}
    (OUT / "script.json").write_text(json.dumps(script, indent=1) + "\n")
    (OUT / "judge_script.json").write_text(json.dumps(judge_script(), indent=1) + "\n")

    expectations = {
        "deadlock": sorted(c["id"] for c in CASES if c.get("deadlock")),
        "routed": next(c["id"] for c in CASES if c.get("routed")),
        "stance_change": next(c["id"] for c in CASES if "stance_change" in c),
        "stance_change_role": next(c["stance_change"]["role"] for c in CASES if "stance_change" in c),
        "stance_change_hypothesis": next(c["ddx"][c["stance_change"]["from"]] for c in CASES if "stance_change" in c),
        "unparseable_first_reply": next(c["id"] for c in CASES if "first_reply_unparseable" in c),
        "triage_unknown_role": next(c["id"] for c in CASES if "triage_unknown_role" in c),
        "clinician_synonym": next(c["id"] for c in CASES if "clinician_synonym" in c),
        "unsummarizable": "c02",
    }
    (OUT / "expectations.json").write_text(json.dumps(expectations, indent=2) + "\n")

    few_shot = [
        {"case_presentation": "A 40-year-old with polyuria, polydipsia and glucose of 22 mmol/L.",
         "final_diagnosis": "Type 2 diabetes mellitus", "rationale": "Hyperglycemia with osmotic symptoms."},
        {"case_presentation": "A 30-year-old with wheeze relieved by salbutamol and nocturnal cough.",
         "final_diagnosis": "Asthma", "rationale": "Reversible airflow obstruction."},
    ]
    with open(OUT / "few_shot.jsonl", "w") as f:
        for ex in few_shot:
            f.write(json.dumps(ex) + "\n")


if __name__ == "__main__":
    main()
