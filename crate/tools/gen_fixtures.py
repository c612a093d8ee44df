#!/usr/bin/env python3
"""Regenerates the bundled test fixtures under crates/cli/tests/fixtures/.

Everything is deterministic: rating mixes are chosen so that bucket means
hit the documented calibration values exactly (integer sums divided once),
and review ids/dates are derived from counters. Run from the repo root:

    python3 tools/gen_fixtures.py
"""

import json
import os

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES = os.path.join(ROOT, "crates", "cli", "tests", "fixtures")

# --- reference issue counts (per-label mention counts with categories) ---

REFERENCE_COUNTS = [
    ("flight_delays_cancellations", "flight_disruptions", 690),
    ("rude_flight_attendants", "customer_service", 591),
    ("poor_food_quality", "in_flight_experience", 555),
    ("poor_communication_regarding_delay", "flight_disruptions", 536),
    ("poor_customer_service", "customer_service", 475),
    ("lack_of_amenities", "in_flight_experience", 442),
    ("unresponsive_crew", "customer_service", 346),
    ("lost_baggage", "baggage_handling", 335),
    ("uncomfortable_seating", "in_flight_experience", 288),
    ("dirty_cabin", "cleanliness", 280),
    ("lack_of_assistance", "customer_service", 194),
    ("seat_assignment_problems", "in_flight_experience", 131),
    ("lack_of_safety_enforcement", "safety_concerns", 130),
    ("damaged_baggage", "baggage_handling", 111),
    ("broken_seats", "in_flight_experience", 107),
    ("unclean_restrooms", "cleanliness", 102),
    ("unexplained_cancellation", "flight_disruptions", 94),
    ("missed_connection", "flight_disruptions", 92),
    ("unhelpful_phone_support", "customer_service", 92),
    ("broken_entertainment_system", "in_flight_experience", 81),
    ("excessive_flight_delay", "flight_disruptions", 73),
    ("disorganized_boarding", "airport_services", 72),
    ("in_flight_experience_general", "in_flight_experience", 66),
    ("difficult_booking_process", "booking_issues", 46),
    ("disorganized_airport_staff", "airport_services", 44),
    ("delayed_baggage", "baggage_handling", 41),
    ("website_issues", "booking_issues", 37),
    ("baggage_handling_fees", "baggage_handling", 28),
    ("inadequate_pre_flight_communication", "flight_disruptions", 24),
    ("lack_of_legroom", "in_flight_experience", 12),
    ("seat_issues", "in_flight_experience", 5),
    ("baggage_handling_general", "baggage_handling", 2),
    ("cleanliness_general", "cleanliness", 2),
    ("poor_entertainment", "in_flight_experience", 1),
    ("unclear_announcements", "flight_disruptions", 1),
]


def row(review_id, airline, rating, body, date, language="en", origin="", title=""):
    return {
        "review_id": review_id,
        "airline": airline,
        "rating": rating,
        "title": title,
        "body": body,
        "language": language,
        "review_date": date,
        "reviewer_origin": origin,
        "route_from": None,
        "route_to": None,
    }


def write_jsonl(path, rows):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=True, separators=(",", ":")) + "\n")
    print(f"wrote {path} ({len(rows)} rows)")


def write_text(path, text):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
    print(f"wrote {path}")


def gen_reference_counts():
    lines = ["label,category,count"]
    for label, category, count in REFERENCE_COUNTS:
        lines.append(f"{label},{category},{count}")
    write_text(os.path.join(FIXTURES, "reference_counts.csv"), "\n".join(lines) + "\n")


def gen_synthetic_100():
    rows = []
    n = 0
    for rating, count in [(1, 10), (2, 20), (3, 30), (4, 25), (5, 15)]:
        for _ in range(count):
            day = (n % 28) + 1
            month = (n % 12) + 1
            rows.append(
                row(
                    f"syn-{n:03d}",
                    "egyptair",
                    rating,
                    f"Synthetic review number {n} for the filter fixture.",
                    f"2021-{month:02d}-{day:02d}",
                )
            )
            n += 1
    write_jsonl(os.path.join(FIXTURES, "synthetic_100.jsonl"), rows)


# Rating mixes per year chosen so sum/count equals the target mean exactly.
EGYPTAIR_YEARS = {
    2019: [(4, 27), (3, 73)],                 # 327/100 = 3.27
    2020: [(4, 8), (3, 20), (2, 12)],         # 116/40  = 2.90
    2021: [(4, 10), (2, 40)],                 # 120/50  = 2.40
    2022: [(2, 54), (1, 6)],                  # 114/60  = 1.90
    2023: [(2, 60), (1, 20)],                 # 140/80  = 1.75
    2024: [(2, 72), (1, 48)],                 # 192/120 = 1.60
    2025: [(2, 10), (1, 10)],                 # 30/20   = 1.50 (Q1 only)
}

EMIRATES_YEARS = {
    2019: [(4, 30), (3, 20)],                 # 180/50 = 3.60
    2020: [(4, 10), (3, 10)],                 # 70/20  = 3.50
    2021: [(4, 22), (3, 18)],                 # 142/40 = 3.55
    2022: [(4, 36), (3, 24)],                 # 216/60 = 3.60
    2023: [(4, 44), (3, 36)],                 # 284/80 = 3.55
    2024: [(4, 20), (3, 20)],                 # 140/40 = 3.50
    2025: [(4, 10), (3, 10)],                 # 70/20  = 3.50 (Q1 only)
}


def gen_trajectory(airline, years, filename):
    rows = []
    n = 0
    for year in sorted(years):
        for rating, count in years[year]:
            for _ in range(count):
                if year == 2025:
                    month = (n % 3) + 1          # Q1 only
                    day = (n % 28) + 1
                else:
                    month = (n % 12) + 1
                    day = (n % 28) + 1
                rows.append(
                    row(
                        f"{airline[:3]}-{year}-{n:04d}",
                        airline,
                        rating,
                        f"Trajectory fixture review {n} for {airline} in {year}.",
                        f"{year}-{month:02d}-{day:02d}",
                    )
                )
                n += 1
    write_jsonl(os.path.join(FIXTURES, filename), rows)


# (region label, origin strings to cycle, rating mix) — means by construction.
EGYPTAIR_REGIONS = [
    ("gcc", ["Riyadh, Saudi Arabia", "Dubai, United Arab Emirates", "Doha, Qatar",
             "Kuwait City, Kuwait", "Manama, Bahrain"], [(1, 8), (2, 2)]),          # 1.2
    ("asia", ["Mumbai, India", "Karachi, Pakistan", "Manila, Philippines",
              "Jakarta, Indonesia", "Dhaka, Bangladesh"], [(1, 3), (2, 7)]),        # 1.7
    ("africa", ["Lagos, Nigeria", "Nairobi, Kenya", "Accra, Ghana"], [(1, 1), (2, 9)]),  # 1.9
    ("easteu", ["Warsaw, Poland", "Bucharest, Romania", "Budapest, Hungary"],
     [(3, 7), (2, 3)]),                                                             # 2.7
    ("westeu", ["London, United Kingdom", "Paris, France", "Berlin, Germany"],
     [(2, 9), (3, 1)]),                                                             # 2.1
    ("noram", ["New York, United States", "Toronto, Canada"], [(2, 8), (3, 2)]),    # 2.2
    ("unk", [""], [(2, 5)]),                                                        # 2.0
]

EMIRATES_REGIONS = [
    ("africa", ["Lagos, Nigeria", "Nairobi, Kenya"], [(2, 7), (3, 3)]),             # 2.3 floor
    ("asia", ["Mumbai, India", "Bangkok, Thailand"], [(3, 9), (4, 1)]),             # 3.1
    ("eap", ["Tokyo, Japan", "Singapore", "Sydney, Australia"], [(3, 8), (4, 2)]),  # 3.2
    ("gcc", ["Dubai, United Arab Emirates", "Riyadh, Saudi Arabia"], [(3, 6), (4, 4)]),  # 3.4
    ("noram", ["New York, United States", "Toronto, Canada"], [(3, 5), (4, 5)]),    # 3.5
    ("easteu", ["Warsaw, Poland", "Prague, Czech Republic"], [(3, 4), (4, 6)]),     # 3.6
    ("westeu", ["London, United Kingdom", "Paris, France"], [(3, 3), (4, 7)]),      # 3.7
]


def gen_regions(airline, spec, filename):
    rows = []
    n = 0
    for tag, origins, mix in spec:
        for rating, count in mix:
            for _ in range(count):
                month = (n % 12) + 1
                date = f"2024-{month:02d}-{(n % 28) + 1:02d}"
                rows.append(
                    row(
                        f"{airline[:3]}-reg-{tag}-{n:03d}",
                        airline,
                        rating,
                        f"Region fixture review {n}.",
                        date,
                        origin=origins[n % len(origins)],
                    )
                )
                n += 1
    write_jsonl(os.path.join(FIXTURES, filename), rows)


DEMO_BODY = (
    "Finally arrived in Cairo. The flight was delayed by 3 hours with zero "
    "updates from the gate agents. Once onboard, the seat would not recline, "
    "and the food was completely cold."
)

AR_LOST_BAG = (
    "للأسف فقدوا "
    "حقيبتي في المطار"
)
AR_DELAYED = (
    "تأخرت الرحلة "
    "ولم يساعدنا أحد"
)

# (id suffix, airline, rating, year, language, body) — negative bodies carry
# lexicon phrases; the yearly counts dip in 2020-2021 and surge after 2022.
PIPELINE_REVIEWS = [
    ("0001", "egyptair", 1, 2016, "en", "The flight was delayed and there were no updates at the gate."),
    ("0002", "egyptair", 2, 2016, "en", "Boarding was chaos and the cabin was dirty."),
    ("0003", "emirates", 2, 2017, "en", "They lost my baggage on the way home."),
    ("0004", "egyptair", 3, 2017, "en", "The food was cold but the crew apologized."),
    ("0005", "egyptair", 2, 2018, "en", "No legroom at all and the screen did not work."),
    ("0006", "emirates", 3, 2018, "en", "Seats were uncomfortable on the night flight."),
    ("0007", "egyptair", 1, 2019, "en", "The flight was delayed for hours, no updates, and the crew ignored us."),
    ("0008", "egyptair", 2, 2019, "en", "Rude flight attendants and the food was terrible."),
    ("0009", "emirates", 2, 2019, "en", "Our baggage was delayed and nobody helped. Terrible customer service."),
    ("0010", "egyptair", 3, 2019, "en", "Website kept crashing so I could not book online."),
    ("0011", "egyptair", 2, 2020, "en", "The flight was cancelled without explanation."),
    ("0012", "emirates", 3, 2021, "en", "The bathroom was dirty on this long flight."),
    ("0013", "egyptair", 1, 2022, "en", "The flight was delayed, there were no updates, and staff were rude."),
    ("0014", "egyptair", 2, 2022, "en", "Unbelievably rude crew ignored our requests the whole time."),
    ("0015", "egyptair", 1, 2022, "ar", AR_DELAYED),
    ("0016", "emirates", 3, 2022, "en", "Seat would not recline and the food was cold."),
    ("0017", "egyptair", 1, 2023, "en", "Missed my connection because the flight was delayed. No one helped us rebook."),
    ("0018", "egyptair", 2, 2023, "en", "The hotline never answered and staff refused to help."),
    ("0019", "egyptair", 1, 2023, "en", "No safety briefing before takeoff and the seatbelt sign ignored by everyone."),
    ("0020", "egyptair", 2, 2023, "ar", AR_LOST_BAG),
    ("0021", "emirates", 3, 2023, "en", "Movies were outdated and there were no amenities in economy."),
    ("0022", "egyptair", 2, 2023, "en", "Charged extra for baggage and then broke my suitcase."),
    ("0023", "egyptair", 1, 2024, "en", "The flight was delayed again with no updates. Rude staff everywhere."),
    ("0024", "egyptair", 2, 2024, "en", "Ground staff had no idea what was happening. Boarding was chaos."),
    ("0025", "egyptair", 1, 2024, "en", "They lost my luggage and the phone support was useless."),
    ("0026", "emirates", 2, 2024, "en", "Stuck on the tarmac for hours with unclear announcements."),
    ("0027", "egyptair", 2, 2024, "en", "The cabin was dirty and everything felt unclean."),
    ("0028", "egyptair", 3, 2024, "en", "Could not understand the announcement about our gate change."),
    ("0029", "egyptair", 1, 2025, "en", "Awful customer service, the crew ignored everyone in the back rows."),
    ("0030", "emirates", 3, 2025, "en", "Separated our seats even though we booked together."),
    # Positive reviews: retained by ingest, excluded by the Stage-1 filter.
    ("0031", "emirates", 5, 2019, "en", "Wonderful crew and excellent entertainment."),
    ("0032", "emirates", 4, 2021, "fr", "Tres bon vol, personnel agreable."),
    ("0033", "egyptair", 4, 2022, "en", "Smooth boarding and a clean cabin this time."),
    ("0034", "emirates", 5, 2023, "de", "Alles bestens, gerne wieder."),
    ("0035", "emirates", 4, 2024, "es", "Buen servicio y comida aceptable."),
    ("0036", "egyptair", 5, 2024, "en", "Great value for money, no complaints."),
]


def gen_pipeline():
    rows = []
    origins = [
        "Riyadh, Saudi Arabia", "Mumbai, India", "London, United Kingdom",
        "Lagos, Nigeria", "Warsaw, Poland", "New York, United States", "",
        "Cairo, Egypt", "Dubai, United Arab Emirates",
    ]
    for i, (suffix, airline, rating, year, lang, body) in enumerate(PIPELINE_REVIEWS):
        month = (i % 12) + 1
        if year == 2025:
            month = (i % 3) + 1
        date = f"{year}-{month:02d}-{(i % 28) + 1:02d}"
        rows.append(
            row(f"p-{suffix}", airline, rating, body, date, language=lang,
                origin=origins[i % len(origins)], title=f"Trip {suffix}")
        )
    # The worked-example review used by the extraction conformance check.
    rows.append(row("demo-0001", "egyptair", 1, DEMO_BODY, "2024-06-01",
                    origin="Riyadh, Saudi Arabia", title="Three problems in one trip"))
    # A duplicate id: ingest keeps the first occurrence.
    rows.append(row("p-0001", "egyptair", 1,
                    "Duplicate row that must be dropped by deduplication.",
                    "2016-02-01"))
    write_jsonl(os.path.join(FIXTURES, "pipeline", "reviews.jsonl"), rows)


GOLDEN_DEMO = (
    '[{"label": "Poor Communication (Delay)", "snippet": "delayed by 3 hours '
    'with zero updates from the gate agents"}, {"label": "Broken Seats", '
    '"snippet": "the seat would not recline"}, {"label": "Poor Food Quality", '
    '"snippet": "the food was completely cold"}]'
)


def gen_goldens():
    goldens = os.path.join(FIXTURES, "goldens")
    os.makedirs(goldens, exist_ok=True)
    write_text(os.path.join(goldens, "demo-0001.json"), GOLDEN_DEMO + "\n")
    # Simple grounded goldens for the negative pipeline reviews.
    snippets = {
        "p-0001": [("flight_delays_cancellations", "flight was delayed")],
        "p-0002": [("disorganized_boarding", "Boarding was chaos"),
                   ("dirty_cabin", "cabin was dirty")],
        "p-0003": [("lost_baggage", "lost my baggage")],
        "p-0007": [("flight_delays_cancellations", "flight was delayed"),
                   ("unresponsive_crew", "crew ignored us")],
        "p-0008": [("rude_flight_attendants", "Rude flight attendants"),
                   ("poor_food_quality", "food was terrible")],
        "p-0013": [("flight_delays_cancellations", "flight was delayed"),
                   ("rude_flight_attendants", "staff were rude")],
        "p-0023": [("flight_delays_cancellations", "flight was delayed"),
                   ("rude_flight_attendants", "Rude staff")],
    }
    for i, (suffix, airline, rating, year, lang, body) in enumerate(PIPELINE_REVIEWS):
        if rating > 3:
            continue
        rid = f"p-{suffix}"
        entries = [
            {"label": label, "snippet": snippet}
            for label, snippet in snippets.get(rid, [])
        ]
        write_text(os.path.join(goldens, f"{rid}.json"),
                   json.dumps(entries, ensure_ascii=True) + "\n")


def gen_bad_goldens():
    bad = os.path.join(FIXTURES, "goldens_bad")
    os.makedirs(bad, exist_ok=True)
    write_text(os.path.join(bad, "malformed.txt"),
               "Sorry, I could not find any issues worth mentioning.\n")
    write_text(os.path.join(bad, "unknown_label.json"),
               '[{"label": "wifi_outage", "snippet": "the wifi did not work"}]\n')
    write_text(os.path.join(bad, "snippet_mismatch.json"),
               '[{"label": "broken_seats", "snippet": "seat was broken"}]\n')
    write_text(os.path.join(bad, "empty_snippet.json"),
               '[{"label": "broken_seats", "snippet": ""}]\n')


if __name__ == "__main__":
    gen_reference_counts()
    gen_synthetic_100()
    gen_trajectory("egyptair", EGYPTAIR_YEARS, "trajectory_egyptair.jsonl")
    gen_trajectory("emirates", EMIRATES_YEARS, "trajectory_emirates.jsonl")
    gen_regions("egyptair", EGYPTAIR_REGIONS, "regions_egyptair.jsonl")
    gen_regions("emirates", EMIRATES_REGIONS, "regions_emirates.jsonl")
    gen_pipeline()
    gen_goldens()
    gen_bad_goldens()
