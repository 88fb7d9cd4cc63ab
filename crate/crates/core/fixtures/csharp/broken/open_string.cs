// expect: UnterminatedString
using UnityEngine;

public class Greeter : MonoBehaviour
{
    private void Start()
    {
        Debug.Log("hello there);
    }
}
