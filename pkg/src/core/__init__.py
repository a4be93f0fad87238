# Graph braid group computations
