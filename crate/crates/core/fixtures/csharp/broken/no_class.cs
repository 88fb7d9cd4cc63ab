// expect: NoClassDeclaration
using UnityEngine;

// Only a using directive and a comment; the model forgot the class.
