#!/usr/bin/env python3
# Regenerates corpus.jsonl and hd.jsonl for the mini pipeline fixture.
# Output is fixed by the seed; rerunning must not change committed files.
import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent
rng = random.Random(20240611)

cities = ["Leeds", "Cardiff", "Glasgow", "Bristol", "Norwich", "Belfast", "Dundee", "York", "Exeter", "Hull"]
orgs = ["the city council", "the health board", "a local charity", "the transport authority",
        "the university", "police", "the water company", "the fire service", "a housing trust"]
people = ["Dr. Helen Ward", "Mr. James Okafor", "Mrs. Priya Shah", "Prof. Alan Reid", "Ms. Clare Dunn",
          "St. John Evans", "Mr. Tom Hale", "Dr. Yusuf Amin"]
topics = [
    ("flooding", ["river levels", "sandbags", "evacuation", "rainfall", "flood defences"]),
    ("budget", ["spending cuts", "council tax", "reserves", "services", "a funding gap"]),
    ("transport", ["bus routes", "rail delays", "a new tram line", "road closures", "cycle lanes"]),
    ("health", ["waiting lists", "a new clinic", "nurse shortages", "winter pressures", "vaccination"]),
    ("schools", ["exam results", "teacher numbers", "a new campus", "free meals", "class sizes"]),
    ("housing", ["rent rises", "new homes", "planning approval", "empty properties", "repairs"]),
]
months = ["January", "February", "March", "April", "May", "June", "July", "August", "September",
          "October", "November", "December"]


def sentence(topic, terms, city, org, person):
    t = rng.choice(terms)
    templates = [
        f"Officials in {city} said {t} had become the main concern for {org} this year.",
        f"{person} told reporters that {t} would be reviewed before the end of {rng.choice(months)}.",
        f"According to {org}, about {rng.randint(2, 90)} per cent of residents were affected by {t}.",
        f"The {topic} report found that {t} and {rng.choice(terms)} were closely linked.",
        f"Residents in {city} complained that {t} had not improved since last year.",
        f"\"We are doing everything we can,\" said {person}, adding that {t} remained a priority.",
        f"A spokesperson for {org} confirmed that {rng.randint(3, 400)} people had been contacted about {t}.",
        f"Critics argued the plan for {t} was too slow and lacked detail.",
        f"The decision on {t} is expected on {rng.randint(1, 28)} {rng.choice(months)}.",
        f"Campaigners welcomed the news but warned that {t} could get worse.",
        f"Figures released by {org} showed {t} costing £{rng.randint(1, 60)}m over two years.",
        f"In {city}, the {topic} debate has focused on {t} for several months.",
    ]
    return rng.choice(templates)


def document(n_sent):
    topic, terms = rng.choice(topics)
    city, org, person = rng.choice(cities), rng.choice(orgs), rng.choice(people)
    lead = f"{city} faces growing pressure over {topic} as {org} outlines new measures on {terms[0]}."
    body = [sentence(topic, terms, city, org, person) for _ in range(n_sent - 1)]
    return " ".join([lead] + body), topic, city, org


corpus = []
for i in range(50):
    text, _, _, _ = document(rng.randint(4, 12))
    corpus.append({"id": f"mini-{i:03d}", "document": text})
# A one-line item falls below the HD length interval and is dropped by
# resampling; the run-on sentence stresses long inputs.
corpus[3]["document"] = "Storm warning issued."
long_tail = ", ".join(f"{t} in {c}" for c in cities for t in ("rail delays", "bus routes"))
corpus[0]["document"] = (corpus[0]["document"] + " Officials said rail delays and bus routes were the main concern, "
                         f"listing {long_tail}, and promised a review.")

hd = []
for i in range(12):
    text, topic, city, org = document(rng.randint(5, 10))
    n_words = rng.randint(14, 62)
    words = (f"{org.capitalize()} in {city} has set out measures on {topic} after months of pressure "
             f"from residents, with officials promising a review and campaigners warning that problems "
             f"could persist without more funding and clearer plans for the coming year ahead, while "
             f"opposition members called for an independent inquiry and local businesses said the "
             f"uncertainty had already hit trade across the region").split()
    summary = " ".join(words[:n_words]).rstrip(",") + "."
    hd.append({"id": f"hd-{i:03d}", "document": text, "summary": summary})


def write(name, rows):
    with open(HERE / name, "w", encoding="utf-8", newline="\n") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


write("corpus.jsonl", corpus)
write("hd.jsonl", hd)
