import pandas as pd
from tabulate import tabulate

# Module for displaying run results in tabular form to user
def display_report(report):

    if report.checks:
        df = pd.DataFrame([check.to_dict() for check in report.checks])
        print(tabulate(df, headers='keys', tablefmt='psql', showindex=False))

    summary = []
    for label, estimate in (("bulk", report.bulk), ("boundary", report.boundary), ("eta", report.eta)):
        if estimate is not None:
            summary.append({"quantity": label, "value": estimate.value, "error": estimate.error})
    for route, estimate in report.boundary_tl3.items():
        if hasattr(estimate, "value"):
            summary.append({"quantity": f"TL3 ({route})", "value": estimate.value, "error": estimate.error})
    if summary:
        print(tabulate(pd.DataFrame(summary), headers='keys', tablefmt='psql', showindex=False, floatfmt=".12g"))

    if report.lform is not None and not summary:
        print(tabulate(report.lform.head(20), headers='keys', tablefmt='psql', showindex=False))
