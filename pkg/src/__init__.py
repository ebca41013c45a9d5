# SLOPE-AMP - Source Package